#ifndef QFORGE_GROUPOID_HPP
#define QFORGE_GROUPOID_HPP

#include <string>
#include <vector>

#include "qforge/check.hpp"
#include "qforge/locale.hpp"
#include "qforge/quantale.hpp"

namespace qf {

constexpr Pt no_pt = 0xffff;

// Topological groupoid on finite carriers.  The constructor validates shapes
// only (table sizes, point ranges, multiplication defined exactly on the
// composable pairs); axioms and continuity are the business of
// validate_groupoid so that broken instances can be represented.
class FinGroupoid {
 public:
  FinGroupoid(std::string name, FinSpace g0, FinSpace g1, std::vector<Pt> d, std::vector<Pt> r,
              std::vector<Pt> m,  // row-major |G1| x |G1|, no_pt off the composables
              std::vector<Pt> i, std::vector<Pt> u);

  const std::string& name() const { return name_; }
  const FinSpace& g0() const { return g0_; }
  const FinSpace& g1() const { return g1_; }
  std::size_t arrows() const { return g1_.points(); }
  std::size_t units() const { return g0_.points(); }

  Pt d(Pt g) const { return d_[g]; }
  Pt r(Pt g) const { return r_[g]; }
  bool composable(Pt g, Pt h) const { return d_[g] == r_[h]; }
  Pt m(Pt g, Pt h) const;  // UsageError on non-composable pairs
  Pt inv(Pt g) const { return i_[g]; }
  Pt unit(Pt p) const { return u_[p]; }

  const std::vector<Pt>& d_table() const { return d_; }
  const std::vector<Pt>& r_table() const { return r_; }
  const std::vector<Pt>& m_table() const { return m_; }
  const std::vector<Pt>& i_table() const { return i_; }
  const std::vector<Pt>& u_table() const { return u_; }

 private:
  std::string name_;
  FinSpace g0_, g1_;
  std::vector<Pt> d_, r_, m_, i_, u_;
};

struct GroupoidReport {
  bool valid = false;  // algebra and continuity
  bool open = false;   // d is an open map
  bool etale = false;  // d is a local homeomorphism
  std::vector<CheckResult> checks;
};

// Exhaustive pointwise check of the groupoid axioms, continuity of every
// structure map (the multiplication on the composable-pairs subspace), and
// the openness classification of d.  When d is open, openness of r and of
// the multiplication are theorems and re-verified: a divergence is an
// incident, not a plain failure.
GroupoidReport validate_groupoid(const FinGroupoid& g);

// Which side the base restrictions and the support read from.  The default
// restricts a <| x along the range map r and takes supports as r-images; the
// alternative restricts along d, for cross-checking the convention.
enum class Side { range, source };

// The open-set quantale of a validated open groupoid: carrier O(G1),
// pointwise product of opens through m, involution through i, base O(G0),
// restrictions by r/d-preimage, support by r-image (d-image with
// Side::source), unit-space trace by u-preimage.  A unit is designated
// exactly when u(G0) is open in G1.  Throws UsageError unless the groupoid
// validates as open.
Quantale oquantale(const FinGroupoid& g, Side side = Side::range);

// Same arrows with d and r exchanged and the product reversed.
FinGroupoid opposite_groupoid(const FinGroupoid& g);

// Fixture constructors used across the corpus and the test suites.
FinGroupoid pair_groupoid(std::size_t n, std::string name);   // discrete pair groupoid
FinGroupoid cyclic_group_groupoid(std::size_t n, std::string name);  // discrete Z/n
FinGroupoid indiscrete_group_groupoid(std::size_t n, std::string name);  // Z/n, indiscrete G1
FinGroupoid unit_groupoid(FinSpace s, std::string name);      // only identity arrows

}  // namespace qf

#endif
