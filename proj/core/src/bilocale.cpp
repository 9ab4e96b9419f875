#include "qforge/bilocale.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qf {

namespace {

bool green(const std::vector<CheckResult>& cs) {
  for (const auto& c : cs)
    if (c.verdict == Verdict::fail || c.verdict == Verdict::incident) return false;
  return true;
}

std::string first_red(const std::vector<CheckResult>& cs) {
  for (const auto& c : cs)
    if (c.verdict == Verdict::fail || c.verdict == Verdict::incident)
      return c.name + ": " + c.witness;
  return {};
}

// Verdict policy for derived statements: a violation on inputs that satisfy
// the definitions contradicts a theorem and is an incident, not a failure.
CheckResult law(bool defn_ok, const std::string& name, const std::string& object,
                const std::string& w) {
  if (w.empty()) return pass_result(name, object);
  if (defn_ok) return incident_result(name, object, w);
  return fail_result(name, object, w);
}

bool same_space(const FinSpace& a, const FinSpace& b) {
  if (a.points() != b.points()) return false;
  for (std::size_t i = 0; i < a.points(); ++i) {
    if (a.point_name(Pt(i)) != b.point_name(Pt(i))) return false;
    for (std::size_t j = 0; j < a.points(); ++j)
      if (a.leq(Pt(i), Pt(j)) != b.leq(Pt(i), Pt(j))) return false;
  }
  return true;
}

bool same_groupoid(const FinGroupoid& a, const FinGroupoid& b) {
  if (a.units() != b.units() || a.arrows() != b.arrows()) return false;
  return a.d_table() == b.d_table() && a.r_table() == b.r_table() &&
         a.m_table() == b.m_table() && a.i_table() == b.i_table() && a.u_table() == b.u_table();
}

struct Dsu {
  std::vector<Pt> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), Pt(0));
  }
  Pt find(Pt v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(Pt a, Pt b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // the smaller index stays canonical, so representatives are stable
    parent[std::max(a, b)] = std::min(a, b);
  }
};

// The pair space over the middle base together with the balanced tensor of
// the two open frames and the point shadow of every tensor element.
struct PairData {
  PullbackSpace p;
  SpatialFrame fx, fy;
  TensorLattice t;
  std::vector<PtMask> mu;  // tensor element -> point set of the pair space
};

PairData build_pair_data(const Bilocale& bx, const Bilocale& by, const std::string& object) {
  const FinSpace& x = bx.x();
  const FinSpace& y = by.x();
  const FinSpace& h0 = by.left.g().g0();
  CMap q(&x, &h0, bx.right.p_table());
  CMap p(&y, &h0, by.left.p_table());
  PullbackSpace pb = pullback(q, p, object);

  SpatialFrame fx = opens_of(x);
  SpatialFrame fy = opens_of(y);
  SpatialFrame fb = opens_of(h0);
  const std::size_t nm = fx.lat->size(), nn = fy.lat->size(), nb = fb.lat->size();
  TensorBase tb;
  tb.base = fb.lat;
  tb.ract.assign(nm * nb, 0);
  tb.lact.assign(nb * nn, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    PtMask qpre = 0, ppre = 0;
    for (std::size_t v = 0; v < x.points(); ++v)
      if ((fb.mask[b] >> bx.right.p(Pt(v))) & 1) qpre |= PtMask(1) << v;
    for (std::size_t w = 0; w < y.points(); ++w)
      if ((fb.mask[b] >> by.left.p(Pt(w))) & 1) ppre |= PtMask(1) << w;
    for (std::size_t m = 0; m < nm; ++m)
      tb.ract[m * nb + b] = fx.by_mask(fx.mask[m] & qpre);
    for (std::size_t n = 0; n < nn; ++n)
      tb.lact[b * nn + n] = fy.by_mask(fy.mask[n] & ppre);
  }
  TensorLattice t = enumerate_tensor(TensorContext::over_base(fx.lat, fy.lat, tb));

  std::vector<Elt> minx(x.points());
  for (std::size_t v = 0; v < x.points(); ++v) minx[v] = fx.by_mask(x.min_open(Pt(v)));
  std::vector<PtMask> mu(t.elts.size(), 0);
  for (std::size_t e = 0; e < t.elts.size(); ++e)
    for (std::size_t i = 0; i < pb.pairs.size(); ++i) {
      auto [a, b] = pb.pairs[i];
      if ((fy.mask[t.elts[e].row(minx[a])] >> b) & 1) mu[e] |= PtMask(1) << i;
    }
  return PairData{std::move(pb), std::move(fx), std::move(fy), std::move(t), std::move(mu)};
}

// Every identification (v.ar, w) ~ (v, ar.w) made by the middle arrows, as a
// pair of pair-space points.  The two actions may be the given ones or
// their lifts along a cover; the carriers and anchors into the pair space
// are the same either way.
std::vector<std::pair<Pt, Pt>> translations(const PairData& pd, const GAction& rx,
                                            const GAction& ly) {
  std::vector<std::pair<Pt, Pt>> out;
  for (std::size_t ar = 0; ar < rx.g().arrows(); ++ar)
    for (std::size_t v = 0; v < rx.x().points(); ++v) {
      if (!rx.composable(Pt(ar), Pt(v))) continue;
      for (std::size_t w = 0; w < ly.x().points(); ++w) {
        if (!ly.composable(Pt(ar), Pt(w))) continue;
        auto a = pd.p.pair_id(rx.apply(Pt(ar), Pt(v)), Pt(w));
        auto b = pd.p.pair_id(Pt(v), ly.apply(Pt(ar), Pt(w)));
        if (!a || !b)
          throw UsageError("the middle translations leave the pair space " + pd.p.space.name());
        out.push_back({*a, *b});
      }
    }
  return out;
}

std::vector<char> subframe_member(const std::vector<PtMask>& mu,
                                  const std::vector<std::pair<Pt, Pt>>& trans) {
  std::vector<char> member(mu.size(), 1);
  for (std::size_t e = 0; e < mu.size(); ++e)
    for (const auto& [a, b] : trans)
      if (((mu[e] >> a) & 1) != ((mu[e] >> b) & 1)) {
        member[e] = 0;
        break;
      }
  return member;
}

}  // namespace

Bilocale make_bilocale(std::string object, GAction left, GAction right) {
  if (!same_space(left.x(), right.x()))
    throw StructuralError("the two actions of " + object + " live on different carriers");
  return Bilocale{std::move(object), std::move(left), std::move(right)};
}

Bilocale self_bilocale_of(const FinGroupoid& g) {
  const FinSpace& arrows = g.g1();
  const std::size_t n = g.arrows();
  std::vector<Pt> lact(n * n, no_pt), ract(n * n, no_pt);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t v = 0; v < n; ++v) {
      if (g.d(Pt(a)) == g.r(Pt(v))) lact[a * n + v] = g.m(Pt(a), Pt(v));
      if (g.r(Pt(a)) == g.d(Pt(v))) ract[a * n + v] = g.m(Pt(v), Pt(a));
    }
  GAction left(g.name() + ".l", g, arrows, g.r_table(), std::move(lact));
  GAction right(g.name() + ".r", opposite_groupoid(g), arrows, g.d_table(), std::move(ract));
  return Bilocale{g.name() + ".self", std::move(left), std::move(right)};
}

std::vector<CheckResult> validate_bilocale(const Bilocale& b) {
  std::vector<CheckResult> out = validate_action(b.left);
  auto rs = validate_action(b.right);
  out.insert(out.end(), rs.begin(), rs.end());

  const GAction& al = b.left;
  const GAction& ar = b.right;
  const FinSpace& x = al.x();
  const FinSpace& g1 = al.g().g1();
  const FinSpace& h1 = ar.g().g1();

  std::string wq;
  for (std::size_t g = 0; g < al.g().arrows() && wq.empty(); ++g)
    for (std::size_t v = 0; v < x.points() && wq.empty(); ++v)
      if (al.composable(Pt(g), Pt(v)) && ar.p(al.apply(Pt(g), Pt(v))) != ar.p(Pt(v)))
        wq = "(" + g1.point_name(Pt(g)) + ", " + x.point_name(Pt(v)) + ")";
  out.push_back(wq.empty() ? pass_result("bilocale.q_invariant", b.object)
                           : fail_result("bilocale.q_invariant", b.object, wq));

  std::string wp;
  for (std::size_t h = 0; h < ar.g().arrows() && wp.empty(); ++h)
    for (std::size_t v = 0; v < x.points() && wp.empty(); ++v)
      if (ar.composable(Pt(h), Pt(v)) && al.p(ar.apply(Pt(h), Pt(v))) != al.p(Pt(v)))
        wp = "(" + h1.point_name(Pt(h)) + ", " + x.point_name(Pt(v)) + ")";
  out.push_back(wp.empty() ? pass_result("bilocale.p_invariant", b.object)
                           : fail_result("bilocale.p_invariant", b.object, wp));

  std::string wa;
  for (std::size_t g = 0; g < al.g().arrows() && wa.empty(); ++g)
    for (std::size_t v = 0; v < x.points() && wa.empty(); ++v) {
      if (!al.composable(Pt(g), Pt(v))) continue;
      for (std::size_t h = 0; h < ar.g().arrows() && wa.empty(); ++h) {
        if (!ar.composable(Pt(h), Pt(v))) continue;
        Pt gv = al.apply(Pt(g), Pt(v));
        Pt vh = ar.apply(Pt(h), Pt(v));
        std::string at = "(" + g1.point_name(Pt(g)) + ", " + x.point_name(Pt(v)) + ", " +
                         h1.point_name(Pt(h)) + ")";
        if (!ar.composable(Pt(h), gv) || !al.composable(Pt(g), vh))
          wa = "the two-sided composite is undefined at " + at;
        else if (ar.apply(Pt(h), gv) != al.apply(Pt(g), vh))
          wa = at;
      }
    }
  out.push_back(wa.empty() ? pass_result("bilocale.middle_assoc", b.object)
                           : fail_result("bilocale.middle_assoc", b.object, wa));
  return out;
}

ComposeResult tensor_compose(const Bilocale& bx, const Bilocale& by) {
  if (!same_groupoid(bx.middle(), by.left.g()))
    throw StructuralError("the middle groupoids of " + bx.object + " and " + by.object +
                          " do not match");
  const std::string object = bx.object + "*" + by.object;
  const bool defn_ok = green(validate_bilocale(bx)) && green(validate_bilocale(by));

  PairData pd = build_pair_data(bx, by, object);
  auto trans = translations(pd, bx.right, by.left);
  auto member = subframe_member(pd.mu, trans);

  // the carrier of the composite: pair-space points modulo the translations
  Dsu dsu(pd.p.pairs.size());
  for (const auto& [a, b] : trans) dsu.unite(a, b);
  std::vector<Pt> class_of(pd.p.pairs.size());
  std::vector<Pt> rep_pt;
  for (std::size_t i = 0; i < pd.p.pairs.size(); ++i) {
    Pt root = dsu.find(Pt(i));
    if (root == Pt(i)) rep_pt.push_back(root);
    class_of[i] = Pt(std::lower_bound(rep_pt.begin(), rep_pt.end(), root) - rep_pt.begin());
  }
  const std::size_t nw = rep_pt.size();
  std::vector<std::string> wnames;
  for (Pt r : rep_pt) wnames.push_back(pd.p.space.point_name(r));
  std::vector<std::pair<Pt, Pt>> wleq;
  for (std::size_t i = 0; i < pd.p.pairs.size(); ++i)
    for (std::size_t j = 0; j < pd.p.pairs.size(); ++j)
      if (pd.p.space.leq(Pt(i), Pt(j))) wleq.push_back({class_of[i], class_of[j]});
  FinSpace w(object, wnames, wleq);

  const FinGroupoid& og = bx.left.g();
  const FinGroupoid& kop = by.right.g();
  std::vector<Pt> pcomp(nw), qcomp(nw);
  for (std::size_t c = 0; c < nw; ++c) {
    pcomp[c] = bx.left.p(pd.p.pairs[rep_pt[c]].first);
    qcomp[c] = by.right.p(pd.p.pairs[rep_pt[c]].second);
  }
  for (std::size_t i = 0; i < pd.p.pairs.size(); ++i)
    if (bx.left.p(pd.p.pairs[i].first) != pcomp[class_of[i]] ||
        by.right.p(pd.p.pairs[i].second) != qcomp[class_of[i]])
      throw UsageError("the composite anchors of " + object + " are not constant on the classes");

  std::vector<Pt> lact(og.arrows() * nw, no_pt), ract(kop.arrows() * nw, no_pt);
  for (std::size_t g = 0; g < og.arrows(); ++g)
    for (std::size_t i = 0; i < pd.p.pairs.size(); ++i) {
      auto [a, b] = pd.p.pairs[i];
      if (!bx.left.composable(Pt(g), a)) continue;
      auto id = pd.p.pair_id(bx.left.apply(Pt(g), a), b);
      if (!id) throw UsageError("the left translations leave the pair space " + object);
      Pt& slot = lact[g * nw + class_of[i]];
      Pt val = class_of[*id];
      if (slot == no_pt)
        slot = val;
      else if (slot != val)
        throw UsageError("the composite left action of " + object +
                         " is not well defined on the classes");
    }
  for (std::size_t k = 0; k < kop.arrows(); ++k)
    for (std::size_t i = 0; i < pd.p.pairs.size(); ++i) {
      auto [a, b] = pd.p.pairs[i];
      if (!by.right.composable(Pt(k), b)) continue;
      auto id = pd.p.pair_id(a, by.right.apply(Pt(k), b));
      if (!id) throw UsageError("the right translations leave the pair space " + object);
      Pt& slot = ract[k * nw + class_of[i]];
      Pt val = class_of[*id];
      if (slot == no_pt)
        slot = val;
      else if (slot != val)
        throw UsageError("the composite right action of " + object +
                         " is not well defined on the classes");
    }
  GAction cleft(object + ".l", og, w, std::move(pcomp), std::move(lact));
  GAction cright(object + ".r", kop, w, std::move(qcomp), std::move(ract));
  Bilocale comp{object, std::move(cleft), std::move(cright)};

  std::vector<CheckResult> checks;
  checks.push_back(
      law(defn_ok, "bilocale.composite_valid", object, first_red(validate_bilocale(comp))));

  std::string cw;
  std::vector<Elt> members;
  for (std::size_t e = 0; e < member.size(); ++e)
    if (member[e]) members.push_back(Elt(e));
  if (!member[pd.t.lat->bottom()] || !member[pd.t.lat->top()])
    cw = "a lattice bound escapes the subframe";
  for (std::size_t i = 0; i < members.size() && cw.empty(); ++i)
    for (std::size_t j = i + 1; j < members.size() && cw.empty(); ++j) {
      if (!member[pd.t.lat->join(members[i], members[j])])
        cw = "the join of " + pd.t.elts[members[i]].describe() + " and " +
             pd.t.elts[members[j]].describe() + " escapes the subframe";
      else if (!member[pd.t.lat->meet(members[i], members[j])])
        cw = "the meet of " + pd.t.elts[members[i]].describe() + " and " +
             pd.t.elts[members[j]].describe() + " escapes the subframe";
    }
  checks.push_back(law(defn_ok, "bilocale.subframe_closed", object, cw));

  // oracle: the subframe elements are exactly the saturated opens of the
  // pair space, i.e. the opens of the quotient, with matching order
  std::string ow;
  {
    SpatialFrame fp = opens_of(pd.p.space);
    std::set<PtMask> sat;
    for (std::size_t o = 0; o < fp.lat->size(); ++o) {
      PtMask m = fp.mask[o];
      bool s = true;
      for (std::size_t i = 0; i < pd.p.pairs.size() && s; ++i)
        if (((m >> i) & 1) != ((m >> rep_pt[class_of[i]]) & 1)) s = false;
      if (s) sat.insert(m);
    }
    std::set<PtMask> mem;
    for (Elt e : members) mem.insert(pd.mu[e]);
    if (mem.size() != members.size())
      ow = "two subframe elements cast the same shadow on the pair space";
    else if (opens_of(w).lat->size() != sat.size())
      ow = "the quotient space misses a saturated open";
    else if (sat != mem) {
      for (PtMask m : sat)
        if (!mem.count(m)) {
          ow = "the saturated open " + pd.p.space.mask_name(m) +
               " is not the shadow of a subframe element";
          break;
        }
      for (PtMask m : mem)
        if (ow.empty() && !sat.count(m))
          ow = "the subframe element over " + pd.p.space.mask_name(m) + " is not saturated";
    } else {
      for (std::size_t i = 0; i < members.size() && ow.empty(); ++i)
        for (std::size_t j = 0; j < members.size() && ow.empty(); ++j)
          if (pd.t.lat->leq(members[i], members[j]) !=
              ((pd.mu[members[i]] & ~pd.mu[members[j]]) == 0))
            ow = "the subframe order disagrees with inclusion at " +
                 pd.t.elts[members[i]].describe();
    }
  }
  checks.push_back(law(defn_ok, "bilocale.coequalizer_spatial", object, ow));

  std::vector<std::pair<Pt, Pt>> reps;
  for (std::size_t c = 0; c < nw; ++c) reps.push_back(pd.p.pairs[rep_pt[c]]);
  return ComposeResult{std::move(comp), std::move(reps), std::move(pd.t), std::move(member),
                       std::move(checks)};
}

CheckResult check_tensor_agreement(const Bilocale& bx, const Bilocale& by, const CoverData& cd) {
  if (!same_groupoid(bx.middle(), by.left.g()))
    throw StructuralError("the middle groupoids of " + bx.object + " and " + by.object +
                          " do not match");
  const std::string object = bx.object + "*" + by.object;
  const bool defn_ok = green(validate_bilocale(bx)) && green(validate_bilocale(by));

  PairData pd = build_pair_data(bx, by, object);
  auto base_member = subframe_member(pd.mu, translations(pd, bx.right, by.left));

  CoverData opcd{opposite_groupoid(cd.ghat), cd.j0, cd.j1};
  GAction lifted_left = lift_action(by.left, cd);
  GAction lifted_right = lift_action(bx.right, opcd);
  auto cover_member = subframe_member(pd.mu, translations(pd, lifted_right, lifted_left));

  std::string w;
  for (std::size_t e = 0; e < base_member.size(); ++e)
    if (base_member[e] != cover_member[e]) {
      w = pd.t.elts[e].describe() + " lies in the " +
          (base_member[e] ? "middle-groupoid" : "cover") + " subframe only";
      break;
    }
  return law(defn_ok, "bilocale.tensor_agreement", object, w);
}

CheckResult associativity_smoke(const Bilocale& bx, const Bilocale& by, const Bilocale& bz) {
  if (!same_groupoid(bx.middle(), by.left.g()) || !same_groupoid(by.middle(), bz.left.g()))
    throw StructuralError("the middle groupoids of " + bx.object + ", " + by.object + ", " +
                          bz.object + " do not chain");
  const std::string object = bx.object + "*" + by.object + "*" + bz.object;
  const bool defn_ok = green(validate_bilocale(bx)) && green(validate_bilocale(by)) &&
                       green(validate_bilocale(bz));
  try {
    ComposeResult cxy = tensor_compose(bx, by);
    ComposeResult cyz = tensor_compose(by, bz);
    ComposeResult l = tensor_compose(cxy.composite, bz);
    ComposeResult r = tensor_compose(bx, cyz.composite);

    // the triple space modulo both middle translations
    std::vector<std::array<Pt, 3>> triples;
    std::map<std::array<Pt, 3>, Pt> tid;
    const FinSpace& x = bx.x();
    const FinSpace& y = by.x();
    const FinSpace& z = bz.x();
    for (std::size_t a = 0; a < x.points(); ++a)
      for (std::size_t b = 0; b < y.points(); ++b)
        for (std::size_t c = 0; c < z.points(); ++c)
          if (bx.right.p(Pt(a)) == by.left.p(Pt(b)) && by.right.p(Pt(b)) == bz.left.p(Pt(c))) {
            tid[{Pt(a), Pt(b), Pt(c)}] = Pt(triples.size());
            triples.push_back({Pt(a), Pt(b), Pt(c)});
          }
    Dsu d3(triples.size());
    auto unite = [&](const std::array<Pt, 3>& s, const std::array<Pt, 3>& t) {
      auto is = tid.find(s);
      auto it = tid.find(t);
      if (is == tid.end() || it == tid.end())
        throw UsageError("the middle translations leave the triple space " + object);
      d3.unite(is->second, it->second);
    };
    for (std::size_t h = 0; h < bx.right.g().arrows(); ++h)
      for (std::size_t a = 0; a < x.points(); ++a) {
        if (!bx.right.composable(Pt(h), Pt(a))) continue;
        for (std::size_t b = 0; b < y.points(); ++b) {
          if (!by.left.composable(Pt(h), Pt(b))) continue;
          for (std::size_t c = 0; c < z.points(); ++c)
            if (by.right.p(Pt(b)) == bz.left.p(Pt(c)))
              unite({bx.right.apply(Pt(h), Pt(a)), Pt(b), Pt(c)},
                    {Pt(a), by.left.apply(Pt(h), Pt(b)), Pt(c)});
        }
      }
    for (std::size_t k = 0; k < by.right.g().arrows(); ++k)
      for (std::size_t b = 0; b < y.points(); ++b) {
        if (!by.right.composable(Pt(k), Pt(b))) continue;
        for (std::size_t c = 0; c < z.points(); ++c) {
          if (!bz.left.composable(Pt(k), Pt(c))) continue;
          for (std::size_t a = 0; a < x.points(); ++a)
            if (bx.right.p(Pt(a)) == by.left.p(Pt(b)))
              unite({Pt(a), by.right.apply(Pt(k), Pt(b)), Pt(c)},
                    {Pt(a), Pt(b), bz.left.apply(Pt(k), Pt(c))});
        }
      }

    const FinSpace& lx = l.composite.x();
    const FinSpace& rx = r.composite.x();
    auto chain_l = [&](Pt c) {
      auto [w, zc] = l.reps[c];
      auto [a, b] = cxy.reps[w];
      auto it = tid.find({a, b, zc});
      if (it == tid.end()) throw UsageError("a left representative escapes the triple space");
      return d3.find(it->second);
    };
    auto chain_r = [&](Pt c) {
      auto [a, u] = r.reps[c];
      auto [b, zc] = cyz.reps[u];
      auto it = tid.find({a, b, zc});
      if (it == tid.end()) throw UsageError("a right representative escapes the triple space");
      return d3.find(it->second);
    };

    std::string w;
    if (lx.points() != rx.points())
      w = "the carriers have " + std::to_string(lx.points()) + " and " +
          std::to_string(rx.points()) + " points";
    std::map<Pt, Pt> to_r;
    for (std::size_t c = 0; c < rx.points() && w.empty(); ++c)
      if (!to_r.emplace(chain_r(Pt(c)), Pt(c)).second)
        w = "the right association identifies " + rx.point_name(Pt(c)) + " with another class";
    std::vector<Pt> phi(lx.points());
    std::set<Pt> seen;
    for (std::size_t c = 0; c < lx.points() && w.empty(); ++c) {
      Pt k = chain_l(Pt(c));
      if (!seen.insert(k).second) {
        w = "the left association identifies " + lx.point_name(Pt(c)) + " with another class";
        break;
      }
      auto it = to_r.find(k);
      if (it == to_r.end()) {
        w = "the class of " + lx.point_name(Pt(c)) + " has no right counterpart";
        break;
      }
      phi[c] = it->second;
    }
    for (std::size_t a = 0; a < lx.points() && w.empty(); ++a)
      for (std::size_t b = 0; b < lx.points() && w.empty(); ++b)
        if (lx.leq(Pt(a), Pt(b)) != rx.leq(phi[a], phi[b]))
          w = "the match is not a homeomorphism at (" + lx.point_name(Pt(a)) + ", " +
              lx.point_name(Pt(b)) + ")";
    for (std::size_t c = 0; c < lx.points() && w.empty(); ++c) {
      if (l.composite.left.p(Pt(c)) != r.composite.left.p(phi[c]))
        w = "the left anchors disagree at " + lx.point_name(Pt(c));
      else if (l.composite.right.p(Pt(c)) != r.composite.right.p(phi[c]))
        w = "the right anchors disagree at " + lx.point_name(Pt(c));
    }
    for (std::size_t g = 0; g < bx.left.g().arrows() && w.empty(); ++g)
      for (std::size_t c = 0; c < lx.points() && w.empty(); ++c)
        if (l.composite.left.composable(Pt(g), Pt(c)) &&
            phi[l.composite.left.apply(Pt(g), Pt(c))] !=
                r.composite.left.apply(Pt(g), phi[c]))
          w = "the left actions disagree at (" + bx.left.g().g1().point_name(Pt(g)) + ", " +
              lx.point_name(Pt(c)) + ")";
    for (std::size_t k = 0; k < bz.right.g().arrows() && w.empty(); ++k)
      for (std::size_t c = 0; c < lx.points() && w.empty(); ++c)
        if (l.composite.right.composable(Pt(k), Pt(c)) &&
            phi[l.composite.right.apply(Pt(k), Pt(c))] !=
                r.composite.right.apply(Pt(k), phi[c]))
          w = "the right actions disagree at (" + bz.right.g().g1().point_name(Pt(k)) + ", " +
              lx.point_name(Pt(c)) + ")";
    return law(defn_ok, "bilocale.associativity", object, w);
  } catch (const UsageError& e) {
    return law(defn_ok, "bilocale.associativity", object, e.what());
  }
}

}  // namespace qf
