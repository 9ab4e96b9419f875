#ifndef QFORGE_BILOCALE_HPP
#define QFORGE_BILOCALE_HPP

#include <string>
#include <utility>
#include <vector>

#include "qforge/actions.hpp"

namespace qf {

// Two-sided carrier: a left G-action and a right H-action on one space.
// The right action is stored as a left action of the opposite groupoid, so
// x.h = right.apply(h, x), defined when r(h) = q(x) and anchored at d(h).
// Plain data; the axioms are the business of validate_bilocale.
struct Bilocale {
  std::string object;
  GAction left;   // G on X, anchored by p
  GAction right;  // opposite(H) on X, anchored by q

  const FinSpace& x() const { return left.x(); }
  FinGroupoid middle() const { return opposite_groupoid(right.g()); }
};

// Throws StructuralError when the two actions do not share a carrier.
Bilocale make_bilocale(std::string object, GAction left, GAction right);

// The groupoid on its own arrow space by multiplication from both sides.
Bilocale self_bilocale_of(const FinGroupoid& g);

// Both single-sided action validations plus the three two-sided diagrams:
// each anchor invariant under the other action, and middle associativity
// (g.x).h = g.(x.h).
std::vector<CheckResult> validate_bilocale(const Bilocale& b);

// Composite of a G-H-bilocale with an H-K-bilocale over the middle H.  The
// carrier is the spatial coequalizer of the two middle translations
// (x.h, y) ~ (x, h.y); independently the subframe of the balanced tensor
// over the middle base on which the two translation preimages agree is
// computed, and the two descriptions must match element for element.  The
// pair space is bounded by the opens guard (12 points).  Throws
// StructuralError on a middle mismatch and UsageError when the quotient
// data is not well defined (invalid inputs).
struct ComposeResult {
  Bilocale composite;
  std::vector<std::pair<Pt, Pt>> reps;  // composite point -> canonical (x, y)
  TensorLattice tensor;                 // O(X) (x)_B O(Y) over the middle base
  std::vector<char> member;             // tensor element -> subframe membership
  std::vector<CheckResult> checks;
};

ComposeResult tensor_compose(const Bilocale& bx, const Bilocale& by);

// The subframe over the middle groupoid against the subframe over its germ
// cover, computed independently from the lifted actions; the two must agree
// element for element.
CheckResult check_tensor_agreement(const Bilocale& bx, const Bilocale& by,
                                   const CoverData& cd);

// (x . y) . z and x . (y . z), matched through the classes of the triple
// space; the canonical match must be an isomorphism of bilocales.
CheckResult associativity_smoke(const Bilocale& bx, const Bilocale& by, const Bilocale& bz);

}  // namespace qf

#endif
