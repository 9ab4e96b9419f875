#ifndef QFORGE_SUPLAT_HPP
#define QFORGE_SUPLAT_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qforge/check.hpp"

namespace qf {

// Interned element id within one lattice.
using Elt = std::uint16_t;
inline constexpr Elt no_elt = 0xffffu;

// Plain dynamic bitset, wide enough for element sets of one lattice.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}
  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t(1) << (i & 63); }
  void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }
  void set_all();
  bool subset_of(const Bits& o) const;
  void and_with(const Bits& o);
  void or_with(const Bits& o);
  std::size_t count() const;
  bool operator==(const Bits& o) const { return n_ == o.n_ && w_ == o.w_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// Finite sup-lattice: a finite poset in which every subset has a join
// (equivalently: binary joins and a bottom exist).  Joins, meets, bottom
// and top are precomputed; elements are opaque interned ids.
class SupLattice {
 public:
  static constexpr std::size_t max_elements = 4096;

  // `leq_pairs` lists a relation whose reflexive-transitive closure is the
  // order.  Throws StructuralError (with a witness) if the closure is not
  // antisymmetric or some pair has no least upper bound.
  SupLattice(std::vector<std::string> names,
             const std::vector<std::pair<Elt, Elt>>& leq_pairs);

  std::size_t size() const { return n_; }
  const std::string& name(Elt a) const { return names_[a]; }
  bool leq(Elt a, Elt b) const { return up_[a].get(b); }
  Elt join(Elt a, Elt b) const { return join_[idx(a, b)]; }
  Elt meet(Elt a, Elt b) const { return meet_[idx(a, b)]; }
  Elt join_of(std::span<const Elt> xs) const;
  Elt meet_of(std::span<const Elt> xs) const;
  Elt bottom() const { return bottom_; }
  Elt top() const { return top_; }

  // Up-set of a as a bitset over element ids.
  const Bits& upset(Elt a) const { return up_[a]; }

  // x is join-irreducible iff x != join of the elements strictly below it.
  const std::vector<Elt>& join_irreducibles() const { return ji_; }
  // Ids of join-irreducibles at or below a.
  const std::vector<Elt>& ji_below(Elt a) const { return ji_below_[a]; }

  // Binary meets distribute over binary joins (enough, by induction, for
  // x /\ \/S = \/(x /\ s) at every finite S).
  bool distributive() const { return distributive_; }
  // First (x, a, b) in id order with x/\(a\/b) != (x/\a)\/(x/\b).
  std::optional<std::array<Elt, 3>> distributivity_witness() const { return distr_witness_; }

  bool same_order_as(const SupLattice& o) const;

 private:
  std::size_t idx(Elt a, Elt b) const { return std::size_t(a) * n_ + b; }

  std::size_t n_ = 0;
  std::vector<std::string> names_;
  std::vector<Bits> up_;  // up_[a] bit b <=> a <= b
  std::vector<Elt> join_, meet_;
  Elt bottom_ = 0, top_ = 0;
  std::vector<Elt> ji_;
  std::vector<std::vector<Elt>> ji_below_;
  bool distributive_ = false;
  std::optional<std::array<Elt, 3>> distr_witness_;
};

using LatPtr = std::shared_ptr<const SupLattice>;

LatPtr make_lattice(std::vector<std::string> names,
                    const std::vector<std::pair<Elt, Elt>>& leq_pairs);

// Handy builders for test/oracle lattices.
LatPtr chain_lattice(std::size_t n);              // 0 < 1 < ... < n-1
LatPtr powerset_lattice(std::size_t n_atoms);     // subsets of {0..n_atoms-1}
LatPtr diamond_m3();                              // bottom, x, y, z, top

// Join-preserving map between sup-lattices, stored as a full table.
class SupMap {
 public:
  SupMap(LatPtr src, LatPtr tgt, std::vector<Elt> table);

  const SupLattice& src() const { return *src_; }
  const SupLattice& tgt() const { return *tgt_; }
  LatPtr src_ptr() const { return src_; }
  LatPtr tgt_ptr() const { return tgt_; }
  Elt operator()(Elt a) const { return tab_[a]; }
  const std::vector<Elt>& table() const { return tab_; }

  static SupMap identity(LatPtr l);
  // this after inner
  SupMap compose(const SupMap& inner) const;
  bool operator==(const SupMap& o) const { return tab_ == o.tab_; }

 private:
  LatPtr src_, tgt_;
  std::vector<Elt> tab_;
};

// Monotone map running against the grain of a sup-map src -> tgt: the table
// is indexed by tgt elements and yields src elements, the direction of a
// right adjoint (right adjoints are meet- but not join-preserving).
struct MonoMap {
  LatPtr src, tgt;
  std::vector<Elt> tab;
  Elt operator()(Elt a) const { return tab[a]; }
};

// Validation kinds exposed by the engine.
//
//  - validate_suplattice: re-checks a built lattice's join/meet tables and,
//    when the subset count is within `exhaustive_limit`, every subset's join;
//    above the limit it checks bottom + all binary joins (complete for finite
//    lattices) plus `samples` pseudo-random subsets ordered by `seed` (the
//    seed never affects the verdict, only which redundant samples run).
//  - validate_supmap: monotone + preserves binary joins + bottom (complete
//    for finite lattices), reported with the violating pair/element.
//  - validate_frame: binary meet-over-join distributivity with witness.
CheckResult validate_suplattice(const SupLattice& l, std::string object,
                                std::uint64_t seed = 0,
                                std::size_t exhaustive_limit = 1u << 20,
                                std::size_t samples = 64);
CheckResult validate_supmap(const SupMap& f, std::string object);
CheckResult validate_frame(const SupLattice& l, std::string object);

// Largest x with f(x) <= y, for every y.  Throws StructuralError (with the
// violating input) if f does not preserve joins.
MonoMap right_adjoint(const SupMap& f);

// f(x) <= y  <=>  x <= g(y) for all x, y.
CheckResult check_adjunction(const SupMap& f, const MonoMap& g, std::string object);

// g preserves meets: exhaustive over subsets when |tgt| <= meet_exhaustive_limit
// (counted in elements), binary+top otherwise.
CheckResult check_meet_preservation(const MonoMap& g, std::string object,
                                    std::size_t meet_exhaustive_limit = 12);

// Enumerate all join-preserving maps src -> tgt (via values on the
// join-irreducibles of src).  Guarded; intended for small lattices.
std::vector<SupMap> enumerate_supmaps(LatPtr src, LatPtr tgt, std::size_t guard = 200000);

std::string elt_list(const SupLattice& l, std::span<const Elt> xs);

}  // namespace qf

#endif
