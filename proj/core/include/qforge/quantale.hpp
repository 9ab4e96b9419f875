#ifndef QFORGE_QUANTALE_HPP
#define QFORGE_QUANTALE_HPP

#include <optional>
#include <string>
#include <vector>

#include "qforge/check.hpp"
#include "qforge/suplat.hpp"
#include "qforge/tensor.hpp"

namespace qf {

// Two-sided restriction structure over a base locale B: a |B| x |Q| table for
// a <| x and a |Q| x |B| table for x |> a.
struct BasedStructure {
  LatPtr base;
  std::vector<Elt> lres;
  std::vector<Elt> rres;
};

// Involutive quantale on a finite sup-lattice carrier, with optional
// designated unit, base structure, support, and unit-space trace.  The
// constructor and attach methods validate shapes only; axioms are checked by
// validate_quantale and friends so that deliberately broken instances can be
// represented and reported on.
class Quantale {
 public:
  Quantale(std::string name, LatPtr carrier, std::vector<Elt> mult, std::vector<Elt> involution,
           Elt unit = no_elt);

  const std::string& name() const { return name_; }
  const SupLattice& lat() const { return *lat_; }
  LatPtr lat_ptr() const { return lat_; }
  std::size_t size() const { return lat_->size(); }

  Elt mul(Elt x, Elt y) const { return mult_[std::size_t(x) * lat_->size() + y]; }
  Elt star(Elt x) const { return inv_[x]; }
  Elt one() const { return lat_->top(); }

  bool unital() const { return unit_ != no_elt; }
  Elt unit() const;
  void designate_unit(Elt e);

  void attach_base(BasedStructure b);
  bool has_base() const { return based_.base != nullptr; }
  const BasedStructure& based() const;
  const SupLattice& base() const;
  LatPtr base_ptr() const;
  Elt lres(Elt a, Elt x) const;
  Elt rres(Elt x, Elt a) const;

  void attach_support(std::vector<Elt> spp);
  bool has_support() const { return !spp_.empty(); }
  Elt spp(Elt x) const;
  const std::vector<Elt>& support_table() const { return spp_; }

  void attach_upsilon(std::vector<Elt> ups);
  bool has_upsilon() const { return !ups_.empty(); }
  Elt upsilon(Elt x) const;
  const std::vector<Elt>& upsilon_table() const { return ups_; }

 private:
  std::string name_;
  LatPtr lat_;
  std::vector<Elt> mult_, inv_;
  Elt unit_ = no_elt;
  BasedStructure based_;
  std::vector<Elt> spp_, ups_;
};

// Axiom packages.  The core quantale laws (associativity, join preservation
// of the product and the unit law when a unit is designated) are always
// checked; packages add the named decorations on top.
enum class Package {
  involutive,
  based,
  quantal_frame,
  supported,
  equivariant,
  stable,
  reflexive,
};

const char* package_name(Package p);

// Throws UsageError when a requested package's data is missing.  Witnesses
// are minimal in element-id order.
std::vector<CheckResult> validate_quantale(const Quantale& q, const std::vector<Package>& packages);
std::vector<Package> packages_present(const Quantale& q);

struct RightSidedResult {
  std::vector<Elt> elements;  // ascending ids
  std::vector<CheckResult> checks;
};
// a with a*top <= a; with support and base attached also verifies the order
// isomorphism between the base and the right-sided part.
RightSidedResult right_sided(const Quantale& q);

struct PartialUnitsResult {
  std::vector<Elt> elements;  // ascending ids
  CheckResult join_is_top;
};
// s with s*s <= e and ss* <= e; requires a designated unit.
PartialUnitsResult partial_units(const Quantale& q);

// For every a: \/ { v(x) <| y : xy <= a } = a (needs upsilon and base).
CheckResult check_unit_laws(const Quantale& q);
// For every a: v(a) <| top = \/ { x : xx* <= a } (needs upsilon and base).
CheckResult check_inverse_law(const Quantale& q);

// The tensor square of the carrier over the base, with the restriction
// actions as the balancing data.
TensorCtx quantale_tensor_ctx(const Quantale& q);
// Row function of the reduced comultiplication at a: x -> \/ { y : xy <= a }.
std::vector<Elt> mu_star_row(const Quantale& q, Elt a);
// Reduced multiplication of a closed bi-ideal: \/_x x * row(x).
Elt apply_mu(const Quantale& q, const BiIdeal& d);

// Multiplicativity of the quantal frame: the reduced comultiplication lands
// in the tensor (incident if the row formula is not closed while the based
// laws hold), preserves the empty join, and preserves binary joins.  When the
// tensor square fits the guards, the whole adjoint is cross-checked against
// an independent Galois scan of the enumerated tensor.
std::vector<CheckResult> check_multiplicative(const Quantale& q, std::size_t max_cells = 4096);

// The three stability formulations, each checked independently, plus an
// agreement verdict that is an incident when they diverge.
std::vector<CheckResult> check_stability_forms(const Quantale& q);

// If the attached support is equivariant, no other sup-map satisfies the
// support laws; searches all sup-maps carrier -> base under the guard.
CheckResult check_support_unique(const Quantale& q, std::size_t guard = 200000);

// For unital quantales: a -> a <| e is an order isomorphism onto the
// downset of e and transforms the restrictions into multiplication.
std::vector<CheckResult> check_iota_iso(const Quantale& q);

// Elements u with ux = xu = x for all x, whether or not one is designated.
std::vector<Elt> abstract_units(const Quantale& q);

struct Classification {
  bool groupoid_quantale = false;
  bool inverse_quantal_frame = false;
  std::string failing_groupoid;  // first failed requirement, empty if none
  std::string failing_iqf;
  std::string note;
  std::vector<CheckResult> detail;
};

// Both verdicts with full detail; requires base, support, and upsilon.  The
// inverse-quantal-frame verdict needs a designated unit, and multiplicativity
// plus the unit laws are then re-derived: failing either while the defining
// axioms hold is an incident, not a mere fail.
Classification classify(const Quantale& q, std::size_t max_cells = 4096);

}  // namespace qf

#endif
