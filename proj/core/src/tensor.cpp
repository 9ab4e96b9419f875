#include "qforge/tensor.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "qforge/check.hpp"

namespace qf {

namespace {

// Checks that a -> tab(a) (one slice of a base action) preserves bottom and
// binary joins; complete for all joins in a finite lattice.
void require_join_preserving(const SupLattice& l, const SupLattice& t,
                             const std::function<Elt(Elt)>& f, const std::string& what) {
  if (f(l.bottom()) != t.bottom())
    throw StructuralError(what + ": does not send bottom to bottom");
  for (Elt a = 0; a < l.size(); ++a)
    for (Elt b = a; b < l.size(); ++b)
      if (f(l.join(a, b)) != t.join(f(a), f(b)))
        throw StructuralError(what + ": not join-preserving at (" + l.name(a) + "," + l.name(b) +
                              ")");
}

}  // namespace

TensorContext::TensorContext(LatPtr m, LatPtr n, TensorBase base)
    : m_(std::move(m)), n_(std::move(n)), base_(std::move(base)) {
  if (!m_ || !n_) throw StructuralError("tensor context: missing factor lattice");
  if (base_.base) {
    const std::size_t nb = base_.base->size();
    if (base_.ract.size() != m_->size() * nb)
      throw StructuralError("tensor context: right action table has wrong size");
    if (base_.lact.size() != nb * n_->size())
      throw StructuralError("tensor context: left action table has wrong size");
    for (Elt b = 0; b < nb; ++b) {
      require_join_preserving(
          *m_, *m_, [&](Elt x) { return ract(x, b); },
          "base action m.(" + base_.base->name(b) + ")");
      require_join_preserving(
          *n_, *n_, [&](Elt x) { return lact(b, x); },
          "base action (" + base_.base->name(b) + ").n");
    }
    // lact_adj[b][y] = \/ { n : b.n <= y }, the right adjoint of each slice.
    lact_adj_.assign(nb * n_->size(), 0);
    for (Elt b = 0; b < nb; ++b)
      for (Elt y = 0; y < n_->size(); ++y) {
        Elt acc = n_->bottom();
        for (Elt x = 0; x < n_->size(); ++x)
          if (n_->leq(lact(b, x), y)) acc = n_->join(acc, x);
        lact_adj_[std::size_t(b) * n_->size() + y] = acc;
      }
  }
}

std::shared_ptr<const TensorContext> TensorContext::plain(LatPtr m, LatPtr n) {
  return std::shared_ptr<const TensorContext>(new TensorContext(std::move(m), std::move(n), {}));
}

std::shared_ptr<const TensorContext> TensorContext::over_base(LatPtr m, LatPtr n,
                                                              TensorBase base) {
  if (!base.base) throw StructuralError("tensor context: over_base requires a base lattice");
  return std::shared_ptr<const TensorContext>(
      new TensorContext(std::move(m), std::move(n), std::move(base)));
}

void TensorContext::close(std::vector<Elt>& row) const {
  const SupLattice& M = *m_;
  const SupLattice& N = *n_;
  if (row.size() != M.size()) throw StructuralError("bi-ideal row has wrong length");
  for (Elt v : row)
    if (v >= N.size()) throw StructuralError("bi-ideal row value out of range");
  const std::size_t nb = balanced() ? base_.base->size() : 0;

  if (M.distributive()) {
    // Work on join-irreducible positions only; values at other elements are
    // the meet of the values at the irreducibles below (rows of a closed set
    // turn joins into meets, and in a distributive lattice the irreducibles
    // are join-prime, so those meets already determine a closed row).
    const std::vector<Elt>& ji = M.join_irreducibles();
    std::vector<Elt> pos(M.size(), no_elt);
    for (std::size_t k = 0; k < ji.size(); ++k) pos[ji[k]] = Elt(k);
    std::vector<Elt> r(ji.size(), N.bottom());
    for (Elt m = 0; m < M.size(); ++m) {
      if (row[m] == N.bottom()) continue;
      for (Elt j : M.ji_below(m)) r[pos[j]] = N.join(r[pos[j]], row[m]);
    }
    auto eval = [&](Elt m) {
      Elt acc = N.top();
      for (Elt j : M.ji_below(m)) acc = N.meet(acc, r[pos[j]]);
      return acc;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      // Antitone repair: j' <= j forces r(j') >= r(j).
      for (std::size_t k = 0; k < ji.size(); ++k)
        for (std::size_t k2 = 0; k2 < ji.size(); ++k2) {
          if (k == k2 || !M.leq(ji[k2], ji[k])) continue;
          Elt v = N.join(r[k2], r[k]);
          if (v != r[k2]) { r[k2] = v; changed = true; }
        }
      // Exchange against the base: (m.b, n) in D <=> (m, b.n) in D.
      for (std::size_t k = 0; k < ji.size() && nb; ++k)
        for (Elt b = 0; b < nb; ++b) {
          // r(j) >= b.(r(j.b))
          Elt v = N.join(r[k], lact(b, eval(ract(ji[k], b))));
          if (v != r[k]) { r[k] = v; changed = true; }
          // r(j.b) >= adj_b(r(j)), raised as the least closed row extension
          Elt m2 = ract(ji[k], b);
          Elt w = lact_adjoint(b, r[k]);
          for (Elt j2 : M.ji_below(m2)) {
            Elt v2 = N.join(r[pos[j2]], w);
            if (v2 != r[pos[j2]]) { r[pos[j2]] = v2; changed = true; }
          }
        }
    }
    for (Elt m = 0; m < M.size(); ++m) row[m] = eval(m);
    return;
  }

  // General path: full row, iterated rules.  Down-closure plus the pair-join
  // rule pin the row function to turn joins into meets at the fixed point.
  row[M.bottom()] = N.top();
  bool changed = true;
  while (changed) {
    changed = false;
    for (Elt m = 0; m < M.size(); ++m)
      for (Elt m2 = 0; m2 < M.size(); ++m2) {
        if (m == m2) continue;
        if (M.leq(m2, m)) {
          Elt v = N.join(row[m2], row[m]);
          if (v != row[m2]) { row[m2] = v; changed = true; }
        }
        Elt j = M.join(m, m2);
        Elt v = N.join(row[j], N.meet(row[m], row[m2]));
        if (v != row[j]) { row[j] = v; changed = true; }
      }
    for (Elt m = 0; m < M.size() && nb; ++m)
      for (Elt b = 0; b < nb; ++b) {
        Elt v = N.join(row[m], lact(b, row[ract(m, b)]));
        if (v != row[m]) { row[m] = v; changed = true; }
        Elt m2 = ract(m, b);
        Elt w = N.join(row[m2], lact_adjoint(b, row[m]));
        if (w != row[m2]) { row[m2] = w; changed = true; }
      }
  }
}

BiIdeal::BiIdeal(TensorCtx ctx, std::vector<Elt> seed_row)
    : ctx_(std::move(ctx)), row_(std::move(seed_row)) {
  ctx_->close(row_);
}

BiIdeal BiIdeal::bottom(TensorCtx ctx) {
  std::vector<Elt> row(ctx->left().size(), ctx->right().bottom());
  return BiIdeal(std::move(ctx), std::move(row));
}

BiIdeal BiIdeal::tau(TensorCtx ctx, Elt m, Elt n) {
  if (m >= ctx->left().size() || n >= ctx->right().size())
    throw StructuralError("tau: element out of range");
  std::vector<Elt> row(ctx->left().size(), ctx->right().bottom());
  row[m] = n;
  return BiIdeal(std::move(ctx), std::move(row));
}

BiIdeal BiIdeal::from_pairs(TensorCtx ctx, std::span<const std::pair<Elt, Elt>> pairs) {
  std::vector<Elt> row(ctx->left().size(), ctx->right().bottom());
  for (auto [m, n] : pairs) {
    if (m >= ctx->left().size() || n >= ctx->right().size())
      throw StructuralError("from_pairs: element out of range");
    row[m] = ctx->right().join(row[m], n);
  }
  return BiIdeal(std::move(ctx), std::move(row));
}

bool BiIdeal::leq(const BiIdeal& o) const {
  const SupLattice& N = ctx_->right();
  for (Elt m = 0; m < row_.size(); ++m)
    if (!N.leq(row_[m], o.row_[m])) return false;
  return true;
}

BiIdeal BiIdeal::join(const BiIdeal& o) const {
  const SupLattice& N = ctx_->right();
  std::vector<Elt> row(row_.size());
  for (Elt m = 0; m < row_.size(); ++m) row[m] = N.join(row_[m], o.row_[m]);
  return BiIdeal(ctx_, std::move(row));
}

BiIdeal BiIdeal::meet(const BiIdeal& o) const {
  // Intersections of closed sets are closed: every closure rule is a Horn
  // condition, so the pointwise meet needs no re-closing.
  const SupLattice& N = ctx_->right();
  BiIdeal d;
  d.ctx_ = ctx_;
  d.row_.resize(row_.size());
  for (Elt m = 0; m < row_.size(); ++m) d.row_[m] = N.meet(row_[m], o.row_[m]);
  return d;
}

std::string BiIdeal::describe() const {
  const SupLattice& M = ctx_->left();
  const SupLattice& N = ctx_->right();
  std::ostringstream os;
  bool any = false;
  for (Elt j : M.join_irreducibles()) {
    if (row_[j] == N.bottom()) continue;
    if (any) os << "|";
    os << "(" << M.name(j) << "," << N.name(row_[j]) << ")";
    any = true;
  }
  return any ? os.str() : "bot";
}

TensorLattice enumerate_tensor(TensorCtx ctx, std::size_t max_cells, std::size_t max_elements) {
  const SupLattice& M = ctx->left();
  const SupLattice& N = ctx->right();
  if (M.size() * N.size() > max_cells)
    throw CapacityError("tensor enumeration: " + std::to_string(M.size()) + "x" +
                        std::to_string(N.size()) + " exceeds the cell guard " +
                        std::to_string(max_cells));

  // Every element is a join of images of pairs, and tau is a bimorphism, so
  // the images of (irreducible, irreducible) pairs generate under joins.
  std::map<std::vector<Elt>, Elt> index;
  std::vector<BiIdeal> elts;
  auto intern = [&](BiIdeal d) -> Elt {
    auto it = index.find(d.rows());
    if (it != index.end()) return it->second;
    if (elts.size() >= max_elements)
      throw CapacityError("tensor enumeration: more than " + std::to_string(max_elements) +
                          " elements");
    Elt id = Elt(elts.size());
    index.emplace(d.rows(), id);
    elts.push_back(std::move(d));
    return id;
  };

  intern(BiIdeal::bottom(ctx));
  std::vector<Elt> fresh;
  for (Elt jm : M.join_irreducibles())
    for (Elt jn : N.join_irreducibles()) {
      std::size_t before = elts.size();
      Elt id = intern(BiIdeal::tau(ctx, jm, jn));
      if (elts.size() > before) fresh.push_back(id);
    }
  // Close under binary joins.
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    Elt a = fresh[i];
    std::size_t limit = elts.size();
    for (Elt b = 0; b < limit; ++b) {
      BiIdeal j = elts[a].join(elts[b]);
      std::size_t before = elts.size();
      Elt id = intern(std::move(j));
      if (elts.size() > before) fresh.push_back(id);
    }
  }

  TensorLattice t;
  t.ctx = ctx;
  t.elts = std::move(elts);
  t.index = std::move(index);

  std::vector<std::string> names(t.elts.size());
  std::vector<std::pair<Elt, Elt>> leq;
  for (Elt a = 0; a < t.elts.size(); ++a) {
    names[a] = t.elts[a].describe();
    for (Elt b = 0; b < t.elts.size(); ++b)
      if (a != b && t.elts[a].leq(t.elts[b])) leq.emplace_back(a, b);
  }
  t.lat = make_lattice(std::move(names), leq);

  t.tau_elt.resize(M.size() * N.size());
  for (Elt m = 0; m < M.size(); ++m)
    for (Elt n = 0; n < N.size(); ++n)
      t.tau_elt[std::size_t(m) * N.size() + n] = t.id_of(BiIdeal::tau(ctx, m, n));
  return t;
}

Elt TensorLattice::id_of(const BiIdeal& d) const {
  auto it = index.find(d.rows());
  if (it == index.end())
    throw StructuralError("tensor lattice: element not in the enumeration (" + d.describe() + ")");
  return it->second;
}

BiIdeal map_bi_ideal(const BiIdeal& d, const SupMap& f, const SupMap& g, TensorCtx out) {
  const SupLattice& M = d.ctx()->left();
  // d = \/_j tau(j, row(j)) over irreducibles, in any finite lattice, so the
  // image is the join of the mapped generators.
  std::vector<Elt> row(out->left().size(), out->right().bottom());
  for (Elt j : M.join_irreducibles()) {
    Elt fm = f(j);
    row[fm] = out->right().join(row[fm], g(d.row(j)));
  }
  return BiIdeal(std::move(out), std::move(row));
}

BiIdeal tensor_left_restrict(const BiIdeal& e, const SupMap& f, TensorCtx out) {
  std::vector<Elt> row(out->left().size(), 0);
  for (Elt m = 0; m < out->left().size(); ++m) row[m] = e.row(f(m));
  std::vector<Elt> copy = row;
  out->close(copy);
  if (copy != row)
    throw StructuralError("tensor restriction along a non-equivariant map is not closed");
  return BiIdeal(std::move(out), std::move(row));
}

Elt pairing_apply(const BiIdeal& d, const SupMap& f, const SupMap& g) {
  const SupLattice& T = *f.tgt_ptr();
  Elt acc = T.bottom();
  for (Elt m = 0; m < d.ctx()->left().size(); ++m)
    acc = T.join(acc, T.meet(f(m), g(d.row(m))));
  return acc;
}

SupMap map_tensor(const TensorLattice& src, const TensorLattice& dst, const SupMap& f,
                  const SupMap& g) {
  std::vector<Elt> tab(src.elts.size());
  for (Elt a = 0; a < src.elts.size(); ++a)
    tab[a] = dst.id_of(map_bi_ideal(src.elts[a], f, g, dst.ctx));
  return SupMap(src.lat, dst.lat, std::move(tab));
}

SupMap pairing(const TensorLattice& src, const SupMap& f, const SupMap& g) {
  std::vector<Elt> tab(src.elts.size());
  for (Elt a = 0; a < src.elts.size(); ++a) tab[a] = pairing_apply(src.elts[a], f, g);
  return SupMap(src.lat, f.tgt_ptr(), std::move(tab));
}

CheckResult check_tau_bimorphism(const TensorLattice& t, std::string object) {
  const SupLattice& M = t.ctx->left();
  const SupLattice& N = t.ctx->right();
  const SupLattice& T = *t.lat;
  for (Elt n = 0; n < N.size(); ++n) {
    if (t.tau(M.bottom(), n) != T.bottom())
      return fail_result("tau-bimorphism", std::move(object),
                         "tau(bot," + N.name(n) + ") != bot");
    for (Elt m1 = 0; m1 < M.size(); ++m1)
      for (Elt m2 = m1; m2 < M.size(); ++m2)
        if (t.tau(M.join(m1, m2), n) != T.join(t.tau(m1, n), t.tau(m2, n)))
          return fail_result("tau-bimorphism", std::move(object),
                             "left joins at (" + M.name(m1) + "," + M.name(m2) + ";" + N.name(n) +
                                 ")");
  }
  for (Elt m = 0; m < M.size(); ++m) {
    if (t.tau(m, N.bottom()) != T.bottom())
      return fail_result("tau-bimorphism", std::move(object),
                         "tau(" + M.name(m) + ",bot) != bot");
    for (Elt n1 = 0; n1 < N.size(); ++n1)
      for (Elt n2 = n1; n2 < N.size(); ++n2)
        if (t.tau(m, N.join(n1, n2)) != T.join(t.tau(m, n1), t.tau(m, n2)))
          return fail_result("tau-bimorphism", std::move(object),
                             "right joins at (" + M.name(m) + ";" + N.name(n1) + "," + N.name(n2) +
                                 ")");
  }
  if (t.ctx->balanced()) {
    const SupLattice& B = *t.ctx->base().base;
    for (Elt m = 0; m < M.size(); ++m)
      for (Elt b = 0; b < B.size(); ++b)
        for (Elt n = 0; n < N.size(); ++n)
          if (t.tau(t.ctx->ract(m, b), n) != t.tau(m, t.ctx->lact(b, n)))
            return fail_result("tau-bimorphism", std::move(object),
                               "exchange at (" + M.name(m) + "," + B.name(b) + "," + N.name(n) +
                                   ")");
  }
  return pass_result("tau-bimorphism", std::move(object));
}

CheckResult check_tensor_universal(const TensorLattice& t, LatPtr p, std::string object,
                                   std::size_t guard) {
  const SupLattice& M = t.ctx->left();
  const SupLattice& N = t.ctx->right();
  const SupLattice& P = *p;
  const std::vector<Elt>& jim = M.join_irreducibles();
  const std::vector<Elt>& jin = N.join_irreducibles();

  // Candidate bimorphisms are determined by a grid of values on irreducible
  // pairs; reject grids whose join-extension fails bimorphism or balance.
  double est = 1;
  for (std::size_t i = 0; i < jim.size() * jin.size(); ++i) {
    est *= double(P.size());
    if (est > double(guard))
      return skipped_result("tensor-universal", std::move(object),
                            "bimorphism grid space exceeds guard " + std::to_string(guard));
  }

  std::vector<SupMap> hom = enumerate_supmaps(t.lat, p, guard);

  const std::size_t cells = jim.size() * jin.size();
  std::vector<Elt> grid(cells, 0);
  std::size_t n_bimorph = 0;
  bool done = cells == 0;
  bool counted_empty = false;
  while (true) {
    if (done && counted_empty) break;
    // Extend the grid to all pairs by joins.
    std::vector<Elt> beta(M.size() * N.size(), P.bottom());
    for (Elt m = 0; m < M.size(); ++m)
      for (Elt n = 0; n < N.size(); ++n) {
        Elt acc = P.bottom();
        for (std::size_t a = 0; a < jim.size(); ++a)
          for (std::size_t b = 0; b < jin.size(); ++b)
            if (M.leq(jim[a], m) && N.leq(jin[b], n))
              acc = P.join(acc, grid[a * jin.size() + b]);
        beta[std::size_t(m) * N.size() + n] = acc;
      }
    auto bval = [&](Elt m, Elt n) { return beta[std::size_t(m) * N.size() + n]; };
    bool ok = true;
    for (Elt m = 0; m < M.size() && ok; ++m)
      for (Elt n1 = 0; n1 < N.size() && ok; ++n1)
        for (Elt n2 = n1; n2 < N.size() && ok; ++n2)
          ok = bval(m, N.join(n1, n2)) == P.join(bval(m, n1), bval(m, n2));
    for (Elt n = 0; n < N.size() && ok; ++n)
      for (Elt m1 = 0; m1 < M.size() && ok; ++m1)
        for (Elt m2 = m1; m2 < M.size() && ok; ++m2)
          ok = bval(M.join(m1, m2), n) == P.join(bval(m1, n), bval(m2, n));
    if (ok && t.ctx->balanced()) {
      const SupLattice& B = *t.ctx->base().base;
      for (Elt m = 0; m < M.size() && ok; ++m)
        for (Elt b = 0; b < B.size() && ok; ++b)
          for (Elt n = 0; n < N.size() && ok; ++n)
            ok = bval(t.ctx->ract(m, b), n) == bval(m, t.ctx->lact(b, n));
    }
    if (ok) {
      ++n_bimorph;
      // The factoring map is forced on generators: h(tau(m,n)) = beta(m,n).
      std::vector<Elt> tab(t.elts.size());
      for (Elt a = 0; a < t.elts.size(); ++a) {
        Elt acc = P.bottom();
        for (Elt j : jim) acc = P.join(acc, bval(j, t.elts[a].row(j)));
        tab[a] = acc;
      }
      bool factored = false;
      for (const SupMap& h : hom) {
        bool match = true;
        for (Elt a = 0; a < t.elts.size() && match; ++a) match = h(a) == tab[a];
        if (match) { factored = true; break; }
      }
      if (!factored)
        return fail_result("tensor-universal", std::move(object),
                           "a bimorphism does not factor through tau");
    }
    if (done) { counted_empty = true; continue; }
    // Odometer.
    std::size_t i = 0;
    while (i < cells) {
      if (++grid[i] < P.size()) break;
      grid[i] = 0;
      ++i;
    }
    if (i == cells) done = counted_empty = true;
  }

  if (n_bimorph != hom.size())
    return fail_result("tensor-universal", std::move(object),
                       std::to_string(n_bimorph) + " bimorphisms vs " +
                           std::to_string(hom.size()) + " join-preserving maps off the tensor");
  return pass_result("tensor-universal", std::move(object));
}

// ---------------------------------------------------------------------------
// Triple tensors.

TriContext::TriContext(LatPtr x, LatPtr mid, LatPtr y, LatPtr base, std::vector<Elt> xr,
                       std::vector<Elt> ml, std::vector<Elt> mr, std::vector<Elt> yl)
    : x_(std::move(x)),
      mid_(std::move(mid)),
      y_(std::move(y)),
      b_(std::move(base)),
      xr_(std::move(xr)),
      ml_(std::move(ml)),
      mr_(std::move(mr)),
      yl_(std::move(yl)) {
  if (!x_->distributive() || !mid_->distributive())
    throw StructuralError("triple tensor: the first two factors must be distributive");
  const std::size_t nb = b_->size();
  if (xr_.size() != x_->size() * nb || ml_.size() != nb * mid_->size() ||
      mr_.size() != mid_->size() * nb || yl_.size() != nb * y_->size())
    throw StructuralError("triple tensor: action table has wrong size");
  for (Elt b = 0; b < nb; ++b) {
    require_join_preserving(*x_, *x_, [&](Elt v) { return this->xr(v, b); }, "x-side action");
    require_join_preserving(*mid_, *mid_, [&](Elt v) { return this->ml(b, v); },
                            "middle left action");
    require_join_preserving(*mid_, *mid_, [&](Elt v) { return this->mr(v, b); },
                            "middle right action");
    require_join_preserving(*y_, *y_, [&](Elt v) { return this->yl(b, v); }, "y-side action");
  }
  yl_adj_.assign(nb * y_->size(), 0);
  for (Elt b = 0; b < nb; ++b)
    for (Elt v = 0; v < y_->size(); ++v) {
      Elt acc = y_->bottom();
      for (Elt w = 0; w < y_->size(); ++w)
        if (y_->leq(this->yl(b, w), v)) acc = y_->join(acc, w);
      yl_adj_[std::size_t(b) * y_->size() + v] = acc;
    }
}

TriIdeal::TriIdeal(TriCtx ctx, std::vector<Elt> grid) : ctx_(std::move(ctx)), grid_(std::move(grid)) {
  close();
}

TriIdeal TriIdeal::bottom(TriCtx ctx) {
  std::size_t cells =
      ctx->x().join_irreducibles().size() * ctx->mid().join_irreducibles().size();
  std::vector<Elt> grid(cells, ctx->y().bottom());
  return TriIdeal(std::move(ctx), std::move(grid));
}

TriIdeal TriIdeal::tau(TriCtx ctx, Elt x, Elt q, Elt y) {
  const std::vector<Elt>& jx = ctx->x().join_irreducibles();
  const std::vector<Elt>& jq = ctx->mid().join_irreducibles();
  std::vector<Elt> grid(jx.size() * jq.size(), ctx->y().bottom());
  for (std::size_t a = 0; a < jx.size(); ++a)
    for (std::size_t b = 0; b < jq.size(); ++b)
      if (ctx->x().leq(jx[a], x) && ctx->mid().leq(jq[b], q)) grid[a * jq.size() + b] = y;
  return TriIdeal(std::move(ctx), std::move(grid));
}

Elt TriIdeal::eval(Elt x, Elt q) const {
  const std::vector<Elt>& jx = ctx_->x().join_irreducibles();
  const std::vector<Elt>& jq = ctx_->mid().join_irreducibles();
  const SupLattice& Y = ctx_->y();
  Elt acc = Y.top();
  for (std::size_t a = 0; a < jx.size(); ++a) {
    if (!ctx_->x().leq(jx[a], x)) continue;
    for (std::size_t b = 0; b < jq.size(); ++b)
      if (ctx_->mid().leq(jq[b], q)) acc = Y.meet(acc, grid_[a * jq.size() + b]);
  }
  return acc;
}

Elt TriIdeal::value(Elt x, Elt q) const { return eval(x, q); }

void TriIdeal::raise_at(Elt x, Elt q, Elt v) {
  const std::vector<Elt>& jx = ctx_->x().join_irreducibles();
  const std::vector<Elt>& jq = ctx_->mid().join_irreducibles();
  const SupLattice& Y = ctx_->y();
  for (std::size_t a = 0; a < jx.size(); ++a) {
    if (!ctx_->x().leq(jx[a], x)) continue;
    for (std::size_t b = 0; b < jq.size(); ++b)
      if (ctx_->mid().leq(jq[b], q)) {
        Elt& cell = grid_[a * jq.size() + b];
        cell = Y.join(cell, v);
      }
  }
}

void TriIdeal::close() {
  const std::vector<Elt>& jx = ctx_->x().join_irreducibles();
  const std::vector<Elt>& jq = ctx_->mid().join_irreducibles();
  const SupLattice& Y = ctx_->y();
  const std::size_t nb = ctx_->base().size();
  bool changed = true;
  while (changed) {
    changed = false;
    // Antitone repair across the grid.
    for (std::size_t a = 0; a < jx.size(); ++a)
      for (std::size_t b = 0; b < jq.size(); ++b)
        for (std::size_t a2 = 0; a2 < jx.size(); ++a2) {
          if (!ctx_->x().leq(jx[a2], jx[a])) continue;
          for (std::size_t b2 = 0; b2 < jq.size(); ++b2) {
            if (!ctx_->mid().leq(jq[b2], jq[b])) continue;
            if (a == a2 && b == b2) continue;
            Elt& cell = grid_[a2 * jq.size() + b2];
            Elt v = Y.join(cell, grid_[a * jq.size() + b]);
            if (v != cell) { cell = v; changed = true; }
          }
        }
    for (std::size_t a = 0; a < jx.size(); ++a)
      for (std::size_t b = 0; b < jq.size(); ++b)
        for (Elt c = 0; c < nb; ++c) {
          std::vector<Elt> before = grid_;
          // (x.c, q, y) <=> (x, c.q, y): both positions carry the same rows.
          Elt va = eval(ctx_->xr(jx[a], c), jq[b]);
          raise_at(jx[a], ctx_->ml(c, jq[b]), va);
          Elt vb = eval(jx[a], ctx_->ml(c, jq[b]));
          raise_at(ctx_->xr(jx[a], c), jq[b], vb);
          // (x, q.c, y) <=> (x, q, c.y): an adjunction on the value side.
          raise_at(jx[a], ctx_->mr(jq[b], c),
                   ctx_->yl_adjoint(c, grid_[a * jq.size() + b]));
          Elt vc = ctx_->yl(c, eval(jx[a], ctx_->mr(jq[b], c)));
          Elt& cell = grid_[a * jq.size() + b];
          cell = Y.join(cell, vc);
          if (grid_ != before) changed = true;
        }
  }
}

bool TriIdeal::leq(const TriIdeal& o) const {
  const SupLattice& Y = ctx_->y();
  for (std::size_t i = 0; i < grid_.size(); ++i)
    if (!Y.leq(grid_[i], o.grid_[i])) return false;
  return true;
}

TriIdeal TriIdeal::join(const TriIdeal& o) const {
  const SupLattice& Y = ctx_->y();
  std::vector<Elt> grid(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) grid[i] = Y.join(grid_[i], o.grid_[i]);
  return TriIdeal(ctx_, std::move(grid));
}

TriIdeal TriIdeal::meet(const TriIdeal& o) const {
  const SupLattice& Y = ctx_->y();
  TriIdeal d(*this);
  for (std::size_t i = 0; i < grid_.size(); ++i) d.grid_[i] = Y.meet(grid_[i], o.grid_[i]);
  return d;
}

}  // namespace qf
