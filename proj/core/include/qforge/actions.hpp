#ifndef QFORGE_ACTIONS_HPP
#define QFORGE_ACTIONS_HPP

#include <optional>
#include <string>
#include <vector>

#include "qforge/cover.hpp"
#include "qforge/tensor.hpp"

namespace qf {

// Left action of a groupoid on a finite space: an anchor into the unit
// space and an action table over the composable pairs (d(g) = p(x)), the
// result anchored at r(g).  The constructor validates shapes only (sizes,
// point ranges, definedness exactly on the composable pairs); continuity
// and the action axioms are the business of validate_action so that broken
// instances can be represented.
class GAction {
 public:
  GAction(std::string name, FinGroupoid g, FinSpace x, std::vector<Pt> p, std::vector<Pt> act);

  const std::string& name() const { return name_; }
  const FinGroupoid& g() const { return g_; }
  const FinSpace& x() const { return x_; }
  Pt p(Pt v) const { return p_[v]; }
  bool composable(Pt arrow, Pt v) const { return g_.d(arrow) == p_[v]; }
  Pt apply(Pt arrow, Pt v) const;  // UsageError off the composable pairs

  const std::vector<Pt>& p_table() const { return p_; }
  const std::vector<Pt>& act_table() const { return act_; }

 private:
  std::string name_;
  FinGroupoid g_;
  FinSpace x_;
  std::vector<Pt> p_, act_;
};

// Pointwise verification of the axioms: continuity of the anchor and of the
// action on the composable-pairs subspace, the anchor square p(g.x) = r(g),
// associativity against the groupoid product, and unitarity.
std::vector<CheckResult> validate_action(const GAction& a);

// The open-set module of an action: the quantale of the acting groupoid
// operating on the frame of opens of the carrier, the base acting by
// anchor-preimage restriction.  A.V is the least open containing the
// pointwise image of A x V; for a validated action over an open groupoid
// that image is already open, and a divergence is recorded as an incident.
struct QModuleData {
  std::string object;
  Quantale q;
  LatPtr xlat;
  std::vector<PtMask> xmask;  // carrier element -> open of the carrier space
  std::vector<Elt> act;       // |Q| x |X|
  std::vector<Elt> bres;      // |B| x |X| anchor restriction
  std::vector<CheckResult> checks;

  Elt mul(Elt a, Elt v) const { return act[std::size_t(a) * xlat->size() + v]; }
  Elt res(Elt b, Elt v) const { return bres[std::size_t(b) * xlat->size() + v]; }
};

// Throws UsageError unless the groupoid validates as open.
QModuleData module_of(const GAction& a);

// Module given by tables only: the spatial side is rebuilt through the
// spectrum of the carrier (finite frames are spatial), and the base acts
// through the partial units below the designated unit, so the locale-level
// checks can still run.  Throws UsageError without a unit or a base.
QModuleData module_from_tables(std::string object, Quantale q, LatPtr xlat,
                               std::vector<Elt> act);

// The inverse image of the module action: its right adjoint, landing in the
// tensor of the quantale with the carrier over the base,
// alpha_*(x) = \/ { a (x) y : a.y <= x }.  With a designated unit the
// partial-unit formula \/_s s (x) s*.x is computed independently and
// compared, and join preservation of the adjoint is verified.  When the
// spatial action is supplied, the tensor itself is cross-checked against
// the frame of opens of the composable-pairs space.
struct InverseImageResult {
  TensorLattice tensor;    // Q (x)_B X
  std::vector<Elt> alpha;  // carrier element -> tensor element
  std::vector<CheckResult> checks;
};

InverseImageResult act_inverse_image(const QModuleData& m, const GAction* a = nullptr);

// Lift along a cover: same carrier, the anchor rerouted through the unit
// bijection, a cover arrow acting as its image does.  Throws UsageError
// when j0 is not a bijection.
GAction lift_action(const GAction& a, const CoverData& cd);

// Descent along a cover: the candidate is determined on each fiber of
// J1 x id, so the search is a well-definedness test on fibers followed by a
// continuity test.  Absence is a reported verdict carrying the witness pair
// (or the violating open), not an error.
struct DescentResult {
  CheckResult verdict;               // actions.descent
  std::optional<GAction> descended;  // over the base groupoid, when it exists
  std::vector<CheckResult> checks;
};

DescentResult check_descent(const GAction& xhat, const CoverAssembly& ca);

// The module-side condition: the right adjoint of the action factors
// through j (x) id by a frame homomorphism.  The module must be over the
// covering quantale of `ieq`.
struct OLocaleResult {
  CheckResult verdict;         // actions.o_locale
  std::vector<Elt> beta_star;  // carrier -> embedded-tensor element, no_elt where absent
  std::vector<CheckResult> checks;
};

OLocaleResult check_O_locale(const QModuleData& m, const IEQFData& ieq);

// Both routes on one cover action, with the biconditional reported (a
// divergence is an incident) and the domination law j(a).x <= a.x of the
// covering action against the descended one.
std::vector<CheckResult> check_descent_vs_o_locale(const GAction& xhat, const CoverAssembly& ca,
                                                   const IEQFData& ieq);

// Invariant elements by the three equivalent module conditions, computed
// over the base quantale and over the cover quantale independently, plus
// the orbit lattice they form, cross-checked against the purely spatial
// coequalizer (saturated opens of the point orbits).
struct OrbitResult {
  std::vector<Elt> invariant;  // ascending carrier element ids
  LatPtr orbit;                // the invariant elements as a lattice
  std::vector<CheckResult> checks;
};

OrbitResult invariants_and_orbit(const GAction& a, const CoverData& cd);

// Equivariance of a continuous map between two actions of one groupoid:
// pointwise, for the lifts along the cover, and as a module homomorphism of
// the open-set preimage over the covering quantale.  The three verdicts
// must agree; a split is an incident.
std::vector<CheckResult> check_equivariant(const std::vector<Pt>& f, const GAction& a,
                                           const GAction& b, const CoverData& cd);

}  // namespace qf

#endif
