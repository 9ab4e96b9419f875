#ifndef QFORGE_TENSOR_HPP
#define QFORGE_TENSOR_HPP

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "qforge/suplat.hpp"

namespace qf {

// Optional middle-quotient data: a base lattice B acting on the right of the
// left factor and on the left of the right factor.  Both actions must be
// join-preserving in the lattice argument for each fixed base element.
struct TensorBase {
  LatPtr base;
  std::vector<Elt> ract;  // index m*|B|+b : m . b in M
  std::vector<Elt> lact;  // index b*|N|+n : b . n in N
};

// Shared immutable data for one tensor product M (x) N or M (x)_B N.
//
// Elements of the tensor are "bi-ideals": subsets of M x N that are
// down-closed, closed under joins in each coordinate separately, contain the
// axes, and (over a base) are closed under the exchange relation
// (m.b, n) in D  <=>  (m, b.n) in D.  Every row {n : (m,n) in D} of such a
// set is a principal down-set, so a bi-ideal is stored as its row function
// m -> max row value, a map turning joins into meets.
class TensorContext {
 public:
  static std::shared_ptr<const TensorContext> plain(LatPtr m, LatPtr n);
  static std::shared_ptr<const TensorContext> over_base(LatPtr m, LatPtr n, TensorBase base);

  const SupLattice& left() const { return *m_; }
  const SupLattice& right() const { return *n_; }
  LatPtr left_ptr() const { return m_; }
  LatPtr right_ptr() const { return n_; }
  bool balanced() const { return base_.base != nullptr; }
  const TensorBase& base() const { return base_; }

  Elt ract(Elt m, Elt b) const { return base_.ract[std::size_t(m) * base_.base->size() + b]; }
  Elt lact(Elt b, Elt n) const { return base_.lact[std::size_t(b) * n_->size() + n]; }
  // Largest n with b.n <= y.
  Elt lact_adjoint(Elt b, Elt y) const {
    return lact_adj_[std::size_t(b) * n_->size() + y];
  }

  // Least closed row function >= seed (in-place).
  void close(std::vector<Elt>& row) const;

 private:
  TensorContext(LatPtr m, LatPtr n, TensorBase base);

  LatPtr m_, n_;
  TensorBase base_;
  std::vector<Elt> lact_adj_;
};

using TensorCtx = std::shared_ptr<const TensorContext>;

class BiIdeal {
 public:
  // Seeds the closure with an arbitrary row function.
  BiIdeal(TensorCtx ctx, std::vector<Elt> seed_row);

  static BiIdeal bottom(TensorCtx ctx);
  static BiIdeal tau(TensorCtx ctx, Elt m, Elt n);  // image of the pair (m,n)
  static BiIdeal from_pairs(TensorCtx ctx, std::span<const std::pair<Elt, Elt>> pairs);

  const TensorCtx& ctx() const { return ctx_; }
  Elt row(Elt m) const { return row_[m]; }
  const std::vector<Elt>& rows() const { return row_; }
  bool contains(Elt m, Elt n) const { return ctx_->right().leq(n, row_[m]); }

  bool leq(const BiIdeal& o) const;
  bool operator==(const BiIdeal& o) const { return row_ == o.row_; }
  BiIdeal join(const BiIdeal& o) const;
  BiIdeal meet(const BiIdeal& o) const;

  std::string describe() const;  // join of generator pairs, for witnesses

 private:
  BiIdeal() = default;
  TensorCtx ctx_;
  std::vector<Elt> row_;
  friend class TensorContext;
};

// Fully enumerated tensor lattice.  `max_cells` guards |M|x|N| on entry and
// `max_elements` the number of bi-ideals produced.
struct TensorLattice {
  TensorCtx ctx;
  std::vector<BiIdeal> elts;
  LatPtr lat;                // inclusion order over elts
  std::vector<Elt> tau_elt;  // |M| x |N| -> element id
  std::map<std::vector<Elt>, Elt> index;

  Elt tau(Elt m, Elt n) const { return tau_elt[std::size_t(m) * ctx->right().size() + n]; }
  Elt id_of(const BiIdeal& d) const;
};

TensorLattice enumerate_tensor(TensorCtx ctx, std::size_t max_cells = 4096,
                               std::size_t max_elements = 4096);

// (f (x) g)(d), elementwise; f : M -> M', g : N -> N'.
BiIdeal map_bi_ideal(const BiIdeal& d, const SupMap& f, const SupMap& g, TensorCtx out);

// Right adjoint of f (x) id at an element e of M' (x) N: row m -> e.row(f(m)).
// Valid for any join-preserving f; used for image-membership tests.
BiIdeal tensor_left_restrict(const BiIdeal& e, const SupMap& f, TensorCtx out);

// [f,g](d) = \/_m f(m) /\ g(d.row(m)); target must be a frame for this to be
// the sup-extension of the evident bimorphism, which all callers guarantee.
Elt pairing_apply(const BiIdeal& d, const SupMap& f, const SupMap& g);

// Same data as sup-maps on a materialized tensor.
SupMap map_tensor(const TensorLattice& src, const TensorLattice& dst, const SupMap& f,
                  const SupMap& g);
SupMap pairing(const TensorLattice& src, const SupMap& f, const SupMap& g);

// tau is a bimorphism: join-preserving in each slot separately.
CheckResult check_tau_bimorphism(const TensorLattice& t, std::string object);

// Bimorphisms M x N -> P correspond one-to-one with sup-maps from the tensor,
// by composing with tau.  Exhaustive for small lattices.
CheckResult check_tensor_universal(const TensorLattice& t, LatPtr p, std::string object,
                                   std::size_t guard = 200000);

// Triple tensor X (x)_B Mid (x)_B Y, elementwise only (never enumerated).
// Closed sets are stored as value grids t : JI(X) x JI(Mid) -> Y.
class TriContext {
 public:
  // xr: X x B -> X, ml: B x Mid -> Mid, mr: Mid x B -> Mid, yl: B x Y -> Y.
  TriContext(LatPtr x, LatPtr mid, LatPtr y, LatPtr base, std::vector<Elt> xr,
             std::vector<Elt> ml, std::vector<Elt> mr, std::vector<Elt> yl);

  const SupLattice& x() const { return *x_; }
  const SupLattice& mid() const { return *mid_; }
  const SupLattice& y() const { return *y_; }
  const SupLattice& base() const { return *b_; }

  Elt xr(Elt x, Elt b) const { return xr_[std::size_t(x) * b_->size() + b]; }
  Elt ml(Elt b, Elt q) const { return ml_[std::size_t(b) * mid_->size() + q]; }
  Elt mr(Elt q, Elt b) const { return mr_[std::size_t(q) * b_->size() + b]; }
  Elt yl(Elt b, Elt y) const { return yl_[std::size_t(b) * y_->size() + y]; }
  Elt yl_adjoint(Elt b, Elt v) const { return yl_adj_[std::size_t(b) * y_->size() + v]; }

  LatPtr x_ptr() const { return x_; }
  LatPtr mid_ptr() const { return mid_; }
  LatPtr y_ptr() const { return y_; }

 private:
  LatPtr x_, mid_, y_, b_;
  std::vector<Elt> xr_, ml_, mr_, yl_, yl_adj_;
};

using TriCtx = std::shared_ptr<const TriContext>;

class TriIdeal {
 public:
  static TriIdeal bottom(TriCtx ctx);
  static TriIdeal tau(TriCtx ctx, Elt x, Elt q, Elt y);

  Elt value(Elt x, Elt q) const;  // largest y with (x,q,y) in the ideal
  bool leq(const TriIdeal& o) const;
  bool operator==(const TriIdeal& o) const { return grid_ == o.grid_; }
  TriIdeal join(const TriIdeal& o) const;
  TriIdeal meet(const TriIdeal& o) const;

  const TriCtx& ctx() const { return ctx_; }

 private:
  TriIdeal(TriCtx ctx, std::vector<Elt> grid);
  void close();
  Elt eval(Elt x, Elt q) const;
  void raise_at(Elt x, Elt q, Elt v);

  TriCtx ctx_;
  std::vector<Elt> grid_;  // JI(X) x JI(Mid) -> Y, canonical after close
};

}  // namespace qf

#endif
