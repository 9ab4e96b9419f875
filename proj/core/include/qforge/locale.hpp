#ifndef QFORGE_LOCALE_HPP
#define QFORGE_LOCALE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qforge/suplat.hpp"

namespace qf {

using Pt = std::uint16_t;
using PtMask = std::uint32_t;  // point sets of one space

// Finite space presented by its specialization preorder; the opens are
// exactly the up-sets, and the minimal open neighbourhood of p is its
// up-set.  Continuity of a point function between such spaces coincides
// with monotonicity.  Non-T0 spaces (indiscrete carriers, for instance) are
// allowed: the preorder then identifies points that no open separates.
class FinSpace {
 public:
  static constexpr std::size_t max_points = 32;

  FinSpace(std::string name, std::vector<std::string> point_names,
           const std::vector<std::pair<Pt, Pt>>& leq_pairs);

  const std::string& name() const { return name_; }
  std::size_t points() const { return k_; }
  const std::string& point_name(Pt p) const { return pt_names_[p]; }
  std::optional<Pt> point_by_name(const std::string& s) const;
  bool leq(Pt p, Pt q) const { return (up_[p] >> q) & 1u; }
  PtMask min_open(Pt p) const { return up_[p]; }  // smallest open containing p
  bool is_open(PtMask s) const;                   // up-closed?
  bool discrete() const;
  bool t0() const;  // no two points share a minimal open

  std::string mask_name(PtMask s) const;

 private:
  std::string name_;
  std::size_t k_;
  std::vector<std::string> pt_names_;
  std::vector<PtMask> up_;
};

// Point function presented as a table; continuity (= monotonicity here) is
// validated on construction.
class CMap {
 public:
  CMap(const FinSpace* src, const FinSpace* tgt, std::vector<Pt> table);

  const FinSpace& src() const { return *src_; }
  const FinSpace& tgt() const { return *tgt_; }
  Pt operator()(Pt p) const { return tab_[p]; }
  const std::vector<Pt>& table() const { return tab_; }

  PtMask image(PtMask s) const;
  PtMask preimage(PtMask s) const;

  static CMap identity(const FinSpace* s);
  CMap compose(const CMap& inner) const;  // this after inner
  bool operator==(const CMap& o) const { return tab_ == o.tab_; }

 private:
  const FinSpace* src_;
  const FinSpace* tgt_;
  std::vector<Pt> tab_;
};

// Witnessed map classification.
struct MapClass {
  bool continuous = true;  // by construction
  bool open = false;       // image of every open is open
  bool surjective = false;
  bool injective = false;
  bool local_homeo = false;      // restriction to each minimal open is a
                                 // homeomorphism onto an open image
  bool regular_open_mono = false;  // homeomorphism onto an open subspace
  std::string witness;             // first failure found for open/local_homeo
};

MapClass classify_map(const CMap& f);

// The frame of opens as a sup-lattice, with the mask of each element.
// Guarded: 2^points must stay within SupLattice::max_elements.
struct SpatialFrame {
  const FinSpace* space = nullptr;
  LatPtr lat;
  std::vector<PtMask> mask;  // element -> point set

  Elt by_mask(PtMask m) const;
  Elt image_elt(const CMap& f, Elt source_elt, const SpatialFrame& src_frame) const;
};

SpatialFrame opens_of(const FinSpace& s);

// Inverse image as a sup-lattice map between materialized frames.
SupMap inverse_image_map(const CMap& f, const SpatialFrame& tgt_frame,
                         const SpatialFrame& src_frame);

// Frame-side classification cross-check for `open`: the inverse image has a
// join-preserving left adjoint satisfying the projection (Frobenius) law
// f_!(a /\ f*(b)) = f_!(a) /\ b.  Exhaustive over both frames; capacity
// errors surface if the source frame is too big to materialize.
CheckResult check_open_frame_side(const CMap& f, bool expect_open, std::string object);

// Pullback of f : A -> C, g : B -> C as a subspace of the product.
struct PullbackSpace {
  FinSpace space;                        // points are composable pairs
  std::vector<std::pair<Pt, Pt>> pairs;  // point -> (a, b)
  CMap proj1() const;
  CMap proj2() const;
  std::optional<Pt> pair_id(Pt a, Pt b) const;

  const FinSpace* left = nullptr;
  const FinSpace* right = nullptr;
};

PullbackSpace pullback(const CMap& f, const CMap& g, std::string name);

// Universal property on a given test cone: unique mediating map exists.
CheckResult check_pullback_universal(const PullbackSpace& p, const CMap& f, const CMap& g,
                                     const CMap& to_a, const CMap& to_b, std::string object);

// The spectrum of a finite distributive lattice: points are the join-
// irreducibles, specialization j <= j' iff j' <=L j, and L is isomorphic to
// the up-set frame of the result.  `elt_to_mask` realizes the isomorphism.
struct Spectrum {
  FinSpace space;
  std::vector<Elt> point_elt;        // point -> join-irreducible element
  std::vector<PtMask> elt_to_mask;   // lattice element -> open of space
};

Spectrum spectrum(LatPtr frame, std::string name);

}  // namespace qf

#endif
