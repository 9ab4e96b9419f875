#ifndef QFORGE_COVER_HPP
#define QFORGE_COVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "qforge/groupoid.hpp"

namespace qf {

// Local bisection: an open domain in G0 and a continuous section of d over
// it whose composition with r is an open order-embedding.  arrow[p] is no_pt
// for points outside the domain.
struct Bisection {
  PtMask domain = 0;
  std::vector<Pt> arrow;

  bool operator==(const Bisection& o) const { return domain == o.domain && arrow == o.arrow; }
};

// All local bisections, the empty one included, in a deterministic order.
std::vector<Bisection> bisections(const FinGroupoid& g);

// The identity section over all of G0.
Bisection unit_bisection(const FinGroupoid& g);

// Pseudogroup composition: (s . t)(p) = s(r(t(p))) t(p) on the open set of
// points where both stages are defined.
Bisection compose_bisections(const FinGroupoid& g, const Bisection& s, const Bisection& t);
Bisection invert_bisection(const FinGroupoid& g, const Bisection& s);

// An etale groupoid over the same unit space together with the covering
// functor data: j0 maps cover units to base units (a homeomorphism), j1 maps
// cover arrows to base arrows.
struct CoverData {
  FinGroupoid ghat;
  std::vector<Pt> j0, j1;
};

struct GermCoverResult {
  std::optional<CoverData> cover;  // absent when not coverable
  CheckResult coverable;           // failure carries an uncovered arrow
};

// The canonical etale cover by germs of bisections: a germ is a bisection
// restricted to the minimal open neighbourhood of a domain point, the germ
// space is topologized by the basic image opens, and j1 evaluates the germ
// at its point.  Arrows lying in no bisection make the groupoid uncoverable,
// which is a reported result rather than an error.
GermCoverResult germ_cover(const FinGroupoid& g);

// Everything derived from a cover that the checkers need: both open-set
// quantales, the carrier masks, and the embedding j computed as J1-preimage
// together with its right adjoint.  `checks` carries the embedding-level
// verification: frame monomorphism, involution preservation, and the
// cross-check of j against the join-of-bisections formula (a disagreement
// between the two routes is an incident).
struct CoverAssembly {
  FinGroupoid base;
  FinGroupoid ghat;
  std::vector<Pt> j0, j1;
  Quantale og, oghat;
  std::vector<PtMask> og_mask, oghat_mask;
  SupMap j;
  std::vector<Elt> jstar;  // right adjoint of j, indexed by oghat elements
  std::vector<CheckResult> checks;
};

// Throws UsageError when the base groupoid is not open or the cover is not a
// valid etale groupoid; throws StructuralError when j1 is not continuous.
CoverAssembly assemble_cover(const FinGroupoid& g, CoverData cd);

// The etale-covered conditions: covering functor with j0 an isomorphism,
// epimorphic j1 (frame-injective preimage), equivariance of the preimage
// against the bisection action, and the epimorphism of j1 x id between the
// composable-pairs spaces.
std::vector<CheckResult> check_etale_covered(const CoverAssembly& ca);

// Action of an open set of cover arrows on an open set of base arrows:
// compose the j1-image on the left through the common unit space.  The
// result of acting by a partial unit is the translation along its bisection.
Elt cover_action(const CoverAssembly& ca, Elt s, Elt q);
// Same, but insists the first argument is a partial unit of O(ghat).
Elt bisection_action(const CoverAssembly& ca, Elt u, Elt q);

// Transport of cover bisections to base bisections along j1, and its monoid
// homomorphism property on every composable pair.
Bisection phi_transport(const CoverAssembly& ca, const Bisection& s);
std::vector<CheckResult> check_phi_homomorphism(const CoverAssembly& ca);

// Abstract inverse-embedding data: an involutive quantal frame, an inverse
// quantal frame over the same base, a frame embedding, and the left action
// table of the big quantale on the small one.  The right action is derived
// through the involutions.
struct IEQFData {
  Quantale og;
  Quantale oghat;
  SupMap j;
  std::vector<Elt> lact;  // |oghat| x |og|

  Elt act(Elt s, Elt q) const { return lact[std::size_t(s) * og.size() + q]; }
  Elt ract(Elt q, Elt s) const { return og.star(act(oghat.star(s), og.star(q))); }
};

IEQFData assemble_ieqf(const CoverAssembly& ca);

// The full definition checklist: quantale-with-actions axioms, items (a)
// through (e), and the derived lemma suite (lax multiplicativity, the
// right-sided properties of j, the comultiplication formula over partial
// units, the order isomorphism on right-sided parts, the support built by
// composing with the cover support, equivariance of the right adjoint, and
// the vanishing of the adjoint on partial units when the embedded quantale
// has no unit).
std::vector<CheckResult> check_inverse_embedded(const IEQFData& d, std::size_t max_cells = 4096);

}  // namespace qf

#endif
