#include "qforge/suplat.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace qf {

void Bits::set_all() {
  for (std::size_t i = 0; i < n_; ++i) set(i);
}

bool Bits::subset_of(const Bits& o) const {
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & ~o.w_[i]) return false;
  return true;
}

void Bits::and_with(const Bits& o) {
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
}

void Bits::or_with(const Bits& o) {
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
}

std::size_t Bits::count() const {
  std::size_t c = 0;
  for (auto w : w_) c += std::size_t(std::popcount(w));
  return c;
}

SupLattice::SupLattice(std::vector<std::string> names,
                       const std::vector<std::pair<Elt, Elt>>& leq_pairs)
    : n_(names.size()), names_(std::move(names)) {
  if (n_ == 0) throw StructuralError("sup-lattice needs at least one element");
  if (n_ > max_elements)
    throw CapacityError("lattice has " + std::to_string(n_) + " elements; guard is " +
                        std::to_string(max_elements));

  up_.assign(n_, Bits(n_));
  for (std::size_t a = 0; a < n_; ++a) up_[a].set(a);
  for (auto [a, b] : leq_pairs) {
    if (a >= n_ || b >= n_)
      throw StructuralError("order pair references unknown element id " +
                            std::to_string(std::max(a, b)));
    up_[a].set(b);
  }
  // Transitive closure (Warshall over bitset rows).
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t a = 0; a < n_; ++a)
      if (up_[a].get(k)) up_[a].or_with(up_[k]);

  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = a + 1; b < n_; ++b)
      if (up_[a].get(b) && up_[b].get(a))
        throw StructuralError("order is not antisymmetric: " + names_[a] + " and " + names_[b]);

  join_.assign(n_ * n_, no_elt);
  meet_.assign(n_ * n_, no_elt);
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) {
      Bits ub = up_[a];
      ub.and_with(up_[b]);
      Elt least = no_elt;
      for (std::size_t m = 0; m < n_; ++m)
        if (ub.get(m) && ub.subset_of(up_[m])) { least = Elt(m); break; }
      if (least == no_elt)
        throw StructuralError("no least upper bound for {" + names_[a] + ", " + names_[b] + "}");
      join_[idx(Elt(a), Elt(b))] = least;
    }
  }

  // Bottom: the least element (join of the empty set).
  {
    Elt bot = no_elt;
    for (std::size_t a = 0; a < n_; ++a) {
      bool least = true;
      for (std::size_t b = 0; b < n_ && least; ++b)
        if (!up_[a].get(b)) least = false;
      if (least) { bot = Elt(a); break; }
    }
    if (bot == no_elt) throw StructuralError("no bottom element (empty join missing)");
    bottom_ = bot;
  }
  top_ = bottom_;
  for (std::size_t a = 0; a < n_; ++a) top_ = join(top_, Elt(a));

  // Meets exist in any finite lattice with all joins: greatest lower bound =
  // join of the common lower bounds.
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) {
      Elt m = bottom_;
      for (std::size_t c = 0; c < n_; ++c)
        if (up_[c].get(a) && up_[c].get(b)) m = join(m, Elt(c));
      if (!up_[m].get(a) || !up_[m].get(b))
        throw StructuralError("no greatest lower bound for {" + names_[a] + ", " + names_[b] + "}");
      meet_[idx(Elt(a), Elt(b))] = m;
    }
  }

  for (std::size_t a = 0; a < n_; ++a) {
    if (a == bottom_) continue;
    Elt below = bottom_;
    for (std::size_t b = 0; b < n_; ++b)
      if (b != a && up_[b].get(a)) below = join(below, Elt(b));
    if (below != Elt(a)) ji_.push_back(Elt(a));
  }
  ji_below_.assign(n_, {});
  for (std::size_t a = 0; a < n_; ++a)
    for (Elt j : ji_)
      if (up_[j].get(a)) ji_below_[a].push_back(j);

  distributive_ = true;
  for (std::size_t x = 0; x < n_ && distributive_; ++x)
    for (std::size_t a = 0; a < n_ && distributive_; ++a)
      for (std::size_t b = 0; b < n_; ++b) {
        Elt lhs = meet(Elt(x), join(Elt(a), Elt(b)));
        Elt rhs = join(meet(Elt(x), Elt(a)), meet(Elt(x), Elt(b)));
        if (lhs != rhs) {
          distributive_ = false;
          distr_witness_ = std::array<Elt, 3>{Elt(x), Elt(a), Elt(b)};
          break;
        }
      }
}

Elt SupLattice::join_of(std::span<const Elt> xs) const {
  Elt r = bottom_;
  for (Elt x : xs) {
    if (x >= n_) throw StructuralError("join_of: unknown element id " + std::to_string(x));
    r = join(r, x);
  }
  return r;
}

Elt SupLattice::meet_of(std::span<const Elt> xs) const {
  Elt r = top_;
  for (Elt x : xs) {
    if (x >= n_) throw StructuralError("meet_of: unknown element id " + std::to_string(x));
    r = meet(r, x);
  }
  return r;
}

bool SupLattice::same_order_as(const SupLattice& o) const {
  if (n_ != o.n_) return false;
  for (std::size_t a = 0; a < n_; ++a)
    if (!(up_[a] == o.up_[a])) return false;
  return true;
}

LatPtr make_lattice(std::vector<std::string> names,
                    const std::vector<std::pair<Elt, Elt>>& leq_pairs) {
  return std::make_shared<const SupLattice>(std::move(names), leq_pairs);
}

LatPtr chain_lattice(std::size_t n) {
  std::vector<std::string> names;
  std::vector<std::pair<Elt, Elt>> leq;
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back("c" + std::to_string(i));
    if (i + 1 < n) leq.push_back({Elt(i), Elt(i + 1)});
  }
  return make_lattice(std::move(names), leq);
}

LatPtr powerset_lattice(std::size_t n_atoms) {
  std::size_t n = std::size_t(1) << n_atoms;
  std::vector<std::string> names(n);
  std::vector<std::pair<Elt, Elt>> leq;
  for (std::size_t m = 0; m < n; ++m) {
    std::string s = "{";
    for (std::size_t i = 0; i < n_atoms; ++i)
      if (m >> i & 1) s += (s.size() > 1 ? ",a" : "a") + std::to_string(i);
    names[m] = s + "}";
    for (std::size_t i = 0; i < n_atoms; ++i)
      if (!(m >> i & 1)) leq.push_back({Elt(m), Elt(m | (std::size_t(1) << i))});
  }
  return make_lattice(std::move(names), leq);
}

LatPtr diamond_m3() {
  std::vector<std::string> names = {"bot", "x", "y", "z", "top"};
  std::vector<std::pair<Elt, Elt>> leq = {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}};
  return make_lattice(std::move(names), leq);
}

SupMap::SupMap(LatPtr src, LatPtr tgt, std::vector<Elt> table)
    : src_(std::move(src)), tgt_(std::move(tgt)), tab_(std::move(table)) {
  if (tab_.size() != src_->size())
    throw StructuralError("sup-map table has " + std::to_string(tab_.size()) +
                          " entries for " + std::to_string(src_->size()) + " elements");
  for (Elt v : tab_)
    if (v >= tgt_->size())
      throw StructuralError("sup-map table references unknown target id " + std::to_string(v));
}

SupMap SupMap::identity(LatPtr l) {
  std::vector<Elt> t(l->size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = Elt(i);
  return SupMap(l, l, std::move(t));
}

SupMap SupMap::compose(const SupMap& inner) const {
  if (inner.tgt_.get() != src_.get() && !inner.tgt_->same_order_as(*src_))
    throw UsageError("compose: inner target does not match outer source");
  std::vector<Elt> t(inner.src_->size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = tab_[inner.tab_[i]];
  return SupMap(inner.src_, tgt_, std::move(t));
}

std::string elt_list(const SupLattice& l, std::span<const Elt> xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += l.name(xs[i]);
  }
  return s + "]";
}

CheckResult validate_suplattice(const SupLattice& l, std::string object, std::uint64_t seed,
                                std::size_t exhaustive_limit, std::size_t samples) {
  const std::size_t n = l.size();
  const std::string kind = "suplat.all_joins_exist";

  // Down-set masks make "u is an upper bound of S" a subset test when n <= 64.
  auto check_subset_lub = [&](const std::vector<Elt>& subset) -> std::optional<std::string> {
    Elt j = l.join_of(subset);
    for (Elt x : subset)
      if (!l.leq(x, j))
        return "join " + l.name(j) + " not above member " + l.name(x) + " of " +
               elt_list(l, subset);
    for (std::size_t u = 0; u < n; ++u) {
      bool upper = true;
      for (Elt x : subset)
        if (!l.leq(x, Elt(u))) { upper = false; break; }
      if (upper && !l.leq(j, Elt(u)))
        return "join " + l.name(j) + " of " + elt_list(l, subset) +
               " not below upper bound " + l.name(std::uint16_t(u));
    }
    return std::nullopt;
  };

  if (n <= 20 && (std::size_t(1) << n) <= exhaustive_limit) {
    // Exhaustive over all subsets, join folded incrementally per mask.
    std::vector<Elt> join_by_mask(std::size_t(1) << n);
    join_by_mask[0] = l.bottom();
    for (std::size_t mask = 1; mask < join_by_mask.size(); ++mask) {
      std::size_t low = std::size_t(std::countr_zero(mask));
      join_by_mask[mask] = l.join(join_by_mask[mask & (mask - 1)], Elt(low));
    }
    for (std::size_t mask = 0; mask < join_by_mask.size(); ++mask) {
      Elt j = join_by_mask[mask];
      for (std::size_t u = 0; u < n; ++u) {
        bool upper = true;
        for (std::size_t x = 0; x < n && upper; ++x)
          if ((mask >> x & 1) && !l.leq(Elt(x), Elt(u))) upper = false;
        if (upper && !l.leq(j, Elt(u))) {
          std::vector<Elt> subset;
          for (std::size_t x = 0; x < n; ++x)
            if (mask >> x & 1) subset.push_back(Elt(x));
          return fail_result(kind, object,
                             "join of " + elt_list(l, subset) + " is " + l.name(j) +
                                 ", not below upper bound " + l.name(Elt(u)));
        }
      }
    }
    return pass_result(kind, object);
  }

  // Binary joins plus bottom (complete for finite lattices), then redundant
  // seeded samples of larger subsets.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<Elt> pair = {Elt(a), Elt(b)};
      if (auto w = check_subset_lub(pair)) return fail_result(kind, object, *w);
    }
  std::uint64_t state = seed * 6364136223846793005ull + 1442695040888963407ull;
  auto next = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state >> 33;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t k = 1 + next() % 5;
    std::vector<Elt> subset;
    for (std::size_t i = 0; i < k; ++i) subset.push_back(Elt(next() % n));
    if (auto w = check_subset_lub(subset)) return fail_result(kind, object, *w);
  }
  return pass_result(kind, object);
}

CheckResult validate_supmap(const SupMap& f, std::string object) {
  const SupLattice& s = f.src();
  const SupLattice& t = f.tgt();
  const std::string kind = "suplat.join_preserving_map";
  if (f(s.bottom()) != t.bottom())
    return fail_result(kind, object,
                       "bottom maps to " + t.name(f(s.bottom())) + ", not " + t.name(t.bottom()));
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (a < b && s.leq(Elt(a), Elt(b)) && !t.leq(f(Elt(a)), f(Elt(b))))
        return fail_result(kind, object,
                           "not monotone at " + s.name(Elt(a)) + " <= " + s.name(Elt(b)));
      Elt lhs = f(s.join(Elt(a), Elt(b)));
      Elt rhs = t.join(f(Elt(a)), f(Elt(b)));
      if (lhs != rhs)
        return fail_result(kind, object,
                           "join of {" + s.name(Elt(a)) + ", " + s.name(Elt(b)) + "} maps to " +
                               t.name(lhs) + " but pointwise join is " + t.name(rhs));
    }
  return pass_result(kind, object);
}

CheckResult validate_frame(const SupLattice& l, std::string object) {
  const std::string kind = "suplat.frame_distributivity";
  if (l.distributive()) return pass_result(kind, object);
  auto [x, a, b] = *l.distributivity_witness();
  return fail_result(kind, object,
                     l.name(x) + " /\\ (" + l.name(a) + " \\/ " + l.name(b) + ") = " +
                         l.name(l.meet(x, l.join(a, b))) + " but (" + l.name(x) + " /\\ " +
                         l.name(a) + ") \\/ (" + l.name(x) + " /\\ " + l.name(b) + ") = " +
                         l.name(l.join(l.meet(x, a), l.meet(x, b))));
}

MonoMap right_adjoint(const SupMap& f) {
  CheckResult v = validate_supmap(f, "right_adjoint input");
  if (!v.ok()) throw StructuralError("right_adjoint needs a join-preserving map: " + v.witness);
  const SupLattice& s = f.src();
  const SupLattice& t = f.tgt();
  std::vector<Elt> tab(t.size());
  for (std::size_t y = 0; y < t.size(); ++y) {
    Elt g = s.bottom();
    for (std::size_t x = 0; x < s.size(); ++x)
      if (t.leq(f(Elt(x)), Elt(y))) g = s.join(g, Elt(x));
    tab[y] = g;
  }
  return MonoMap{f.src_ptr(), f.tgt_ptr(), std::move(tab)};
}

CheckResult check_adjunction(const SupMap& f, const MonoMap& g, std::string object) {
  const SupLattice& s = f.src();
  const SupLattice& t = f.tgt();
  const std::string kind = "suplat.adjunction_law";
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = 0; y < t.size(); ++y) {
      bool lhs = t.leq(f(Elt(x)), Elt(y));
      bool rhs = s.leq(Elt(x), g(Elt(y)));
      if (lhs != rhs)
        return fail_result(kind, object,
                           "f(" + s.name(Elt(x)) + ") <= " + t.name(Elt(y)) + " is " +
                               (lhs ? "true" : "false") + " but " + s.name(Elt(x)) +
                               " <= g(" + t.name(Elt(y)) + ") is " + (rhs ? "true" : "false"));
    }
  return pass_result(kind, object);
}

CheckResult check_meet_preservation(const MonoMap& g, std::string object,
                                    std::size_t meet_exhaustive_limit) {
  const SupLattice& t = *g.tgt;  // g : tgt(of f) -> src(of f)
  const SupLattice& s = *g.src;
  const std::string kind = "suplat.adjoint_preserves_meets";
  if (t.size() <= meet_exhaustive_limit) {
    std::size_t total = std::size_t(1) << t.size();
    for (std::size_t mask = 0; mask < total; ++mask) {
      std::vector<Elt> subset;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (mask >> i & 1) subset.push_back(Elt(i));
      Elt m = t.meet_of(subset);
      std::vector<Elt> imgs;
      for (Elt x : subset) imgs.push_back(g(x));
      Elt lhs = g(m);
      Elt rhs = s.meet_of(imgs);
      if (lhs != rhs)
        return fail_result(kind, object,
                           "meet of " + elt_list(t, subset) + " maps to " + s.name(lhs) +
                               " but pointwise meet is " + s.name(rhs));
    }
    return pass_result(kind, object);
  }
  if (g(t.top()) != s.top())
    return fail_result(kind, object, "top maps to " + s.name(g(t.top())));
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t.size(); ++b) {
      Elt lhs = g(t.meet(Elt(a), Elt(b)));
      Elt rhs = s.meet(g(Elt(a)), g(Elt(b)));
      if (lhs != rhs)
        return fail_result(kind, object,
                           "meet of {" + t.name(Elt(a)) + ", " + t.name(Elt(b)) + "} maps to " +
                               s.name(lhs) + " but pointwise meet is " + s.name(rhs));
    }
  return pass_result(kind, object);
}

std::vector<SupMap> enumerate_supmaps(LatPtr src, LatPtr tgt, std::size_t guard) {
  const auto& ji = src->join_irreducibles();
  double combos = 1;
  for (std::size_t i = 0; i < ji.size(); ++i) {
    combos *= double(tgt->size());
    if (combos > double(guard))
      throw CapacityError("enumerate_supmaps: |tgt|^|ji(src)| exceeds guard " +
                          std::to_string(guard));
  }
  std::vector<SupMap> out;
  std::set<std::vector<Elt>> seen;
  std::vector<Elt> assign(ji.size(), 0);
  while (true) {
    std::vector<Elt> tab(src->size());
    for (std::size_t x = 0; x < src->size(); ++x) {
      Elt v = tgt->bottom();
      for (std::size_t k = 0; k < ji.size(); ++k)
        if (src->leq(ji[k], Elt(x))) v = tgt->join(v, assign[k]);
      tab[x] = v;
    }
    if (seen.insert(tab).second) {
      SupMap f(src, tgt, tab);
      if (validate_supmap(f, "candidate").ok()) out.push_back(std::move(f));
    }
    std::size_t k = 0;
    while (k < assign.size()) {
      if (++assign[k] < tgt->size()) break;
      assign[k] = 0;
      ++k;
    }
    if (k == assign.size()) break;
  }
  return out;
}

}  // namespace qf
