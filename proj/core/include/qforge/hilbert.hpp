#ifndef QFORGE_HILBERT_HPP
#define QFORGE_HILBERT_HPP

#include <optional>
#include <string>
#include <vector>

#include "qforge/actions.hpp"

namespace qf {

// Left module over an involutive quantale with a quantale-valued inner
// product, an optional support (valued under the designated unit) and an
// optional basis.  Plain data; axioms are the business of validate_hilbert
// so that broken instances can be represented.
struct HilbertModule {
  std::string object;
  Quantale q;
  LatPtr x;
  std::vector<Elt> act;   // |Q| x |X|
  std::vector<Elt> ip;    // |X| x |X| -> Q
  std::vector<Elt> sppx;  // |X| -> Q, valued under the unit; empty when absent
  std::optional<std::vector<Elt>> basis;

  Elt mul(Elt a, Elt v) const { return act[std::size_t(a) * x->size() + v]; }
  Elt inner(Elt v, Elt w) const { return ip[std::size_t(v) * x->size() + w]; }
  Elt spp(Elt v) const { return sppx[v]; }
  bool has_support() const { return !sppx.empty(); }
};

// The quantale as a module over itself, with <a,b> = ab* and the quantale's
// own support when it has one.
HilbertModule self_module(const Quantale& q);

// The open-set module of an action of an etale groupoid whose anchor is a
// local homeomorphism: support by unit-image of the anchor image, inner
// product computed by the partial-unit formula.  Throws UsageError when the
// groupoid is not etale or the anchor is not a local homeomorphism.
HilbertModule sheaf_of(const GAction& a);

enum class HilbertPackage { pre_hilbert, hilbert, complete, supported, stable };

const char* hilbert_package_name(HilbertPackage p);

// The packages whose data is present (completeness counts as present when a
// basis is stored or the carrier is small enough to search).
std::vector<HilbertPackage> hilbert_packages_present(const HilbertModule& h);

// Exhaustive axiom check per requested package.  The completeness search
// tries subsets of size <= 4 over carriers <= 16 elements; beyond that a
// stored basis is required.  Throws UsageError for missing package data.
std::vector<CheckResult> validate_hilbert(const HilbertModule& h,
                                          const std::vector<HilbertPackage>& packages);

// The partial-unit inner-product formula <x,y> = \/_u u.spp(u*x /\ y),
// compared against the stored table (a divergence on a validated module is
// an incident).  Throws UsageError without a designated unit or a support.
struct InnerFormulaResult {
  std::vector<Elt> table;  // |X| x |X| -> Q
  std::vector<CheckResult> checks;
};

InnerFormulaResult inner_product_formula(const HilbertModule& h);

// Hilbert sections <x,s>s <= x and local sections spp(x)s = x for x <= s,
// with the agreement of the two sets, the section property of any stored
// basis, and the basis property of the local sections.
struct SectionsResult {
  std::vector<Elt> hilbert;  // ascending element ids
  std::vector<Elt> local;
  std::vector<CheckResult> checks;
};

SectionsResult hilbert_sections(const HilbertModule& h);

// Membership of every inner-product value in the image of the embedding.
CheckResult check_O_sheaf(const HilbertModule& h, const IEQFData& ieq);

// Descent of the action and membership of the sheaf inner product in the
// embedded quantale, computed independently; the two verdicts must agree.
std::vector<CheckResult> thm_descent_iff_inner(const GAction& xhat, const CoverAssembly& ca,
                                               const IEQFData& ieq);

// Sheaf homomorphism conditions for a sup-map table f between two modules
// over one quantale: module equivariance, support preservation, and local
// sections landing on local sections.
std::vector<CheckResult> check_sheaf_hom(const std::vector<Elt>& f, const HilbertModule& hx,
                                         const HilbertModule& hy);

// A left action against a right-sheaf inner product: the part of a bilocale
// the adjointness law <j(a)x, y> = <x, j(a*)y> needs.
struct BilocaleSheafData {
  std::string object;
  Quantale q1;            // covering quantale acting on the left
  LatPtr x;
  std::vector<Elt> lact;  // |q1| x |X|
  Quantale q2;            // the inner product is valued here
  std::vector<Elt> ip;    // |X| x |X| -> q2, right-module convention
};

// The covering quantale over itself: left multiplication and <a,b> = a*b.
BilocaleSheafData self_bilocale(const IEQFData& ieq);

std::vector<CheckResult> check_adjointness(const BilocaleSheafData& d, const IEQFData& ieq);

// Spatial side of the sheaf characterization: on the spectrum of the
// carrier the support sends points to points of the unit downset and the
// induced anchor is a local homeomorphism.
std::vector<CheckResult> sheaf_anchor_checks(const HilbertModule& h);

// Instance-level sheaf correspondence over one cover: each cover sheaf
// descends exactly when its inner product lands in the embedded quantale,
// lifts of base sheaves are O-valued and descend back to their source, and
// descent respects isomorphism classes in both directions.  Carriers are
// capped at 8 opens.
std::vector<CheckResult> sheaf_correspondence(const std::vector<GAction>& cover_sheaves,
                                              const std::vector<GAction>& base_sheaves,
                                              const CoverAssembly& ca, const IEQFData& ieq);

}  // namespace qf

#endif
