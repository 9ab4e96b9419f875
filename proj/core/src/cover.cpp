#include "qforge/cover.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qforge/tensor.hpp"

namespace qf {

namespace {

std::string bisection_name(const FinGroupoid& g, const Bisection& b) {
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (Pt p = 0; p < g.units(); ++p) {
    if (b.arrow[p] == no_pt) continue;
    if (!first) os << ",";
    first = false;
    os << g.g0().point_name(p) << ":" << g.g1().point_name(b.arrow[p]);
  }
  os << "]";
  return os.str();
}

std::vector<Pt> restrict_tab(const std::vector<Pt>& tab, PtMask keep) {
  std::vector<Pt> out(tab.size(), no_pt);
  for (std::size_t p = 0; p < tab.size(); ++p)
    if ((keep >> p) & 1u) out[p] = tab[p];
  return out;
}

bool valid_bisection(const FinGroupoid& g, const Bisection& b, std::string* why) {
  const FinSpace& s0 = g.g0();
  const std::size_t k0 = s0.points();
  auto explain = [&](std::string s) {
    if (why) *why = std::move(s);
    return false;
  };
  if (b.arrow.size() != k0) return explain("section table has the wrong size");
  if (!s0.is_open(b.domain)) return explain("domain is not open");
  for (Pt p = 0; p < k0; ++p) {
    bool in = (b.domain >> p) & 1u;
    if (!in) {
      if (b.arrow[p] != no_pt) return explain("value outside the domain at " + s0.point_name(p));
      continue;
    }
    if (b.arrow[p] == no_pt || b.arrow[p] >= g.arrows())
      return explain("missing value at " + s0.point_name(p));
    if (g.d(b.arrow[p]) != p) return explain("not a section of d at " + s0.point_name(p));
  }
  PtMask image = 0;
  for (Pt p = 0; p < k0; ++p) {
    if (!((b.domain >> p) & 1u)) continue;
    Pt rp = g.r(b.arrow[p]);
    if ((image >> rp) & 1u) return explain("r is not injective on the section");
    image |= PtMask(1) << rp;
    for (Pt q = 0; q < k0; ++q) {
      if (!((b.domain >> q) & 1u)) continue;
      if (s0.leq(p, q) && !g.g1().leq(b.arrow[p], b.arrow[q]))
        return explain("section not continuous at " + s0.point_name(p) + " <= " +
                       s0.point_name(q));
      if (s0.leq(p, q) != s0.leq(g.r(b.arrow[p]), g.r(b.arrow[q])))
        return explain("r does not embed the section order at " + s0.point_name(p) + "," +
                       s0.point_name(q));
    }
  }
  if (!s0.is_open(image)) return explain("r-image of the section is not open");
  return true;
}

CheckResult fold_into(const std::string& name, const std::string& obj,
                      const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident)
      return fail_result(name, obj, r.name + ": " + r.witness);
  return pass_result(name, obj);
}

// Preimage of opens is injective iff every minimal open is the up-closure of
// its intersection with the image: an open U is then recoverable from U
// intersected with the image, because U is the union of the minimal opens of
// its points.
std::optional<Pt> frame_epi_defect(const FinSpace& tgt, const std::vector<char>& in_image) {
  for (Pt y = 0; y < tgt.points(); ++y) {
    PtMask up = tgt.min_open(y);
    PtMask gen = 0;
    for (Pt z = 0; z < tgt.points(); ++z)
      if (((up >> z) & 1u) && in_image[z]) gen |= tgt.min_open(z);
    if (gen != up) return y;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Bisection> bisections(const FinGroupoid& g) {
  const FinSpace& s0 = g.g0();
  const std::size_t k0 = s0.points();
  if (k0 > 16) throw CapacityError("bisections: unit space too large to enumerate opens");

  std::vector<std::vector<Pt>> by_d(k0);
  for (Pt a = 0; a < g.arrows(); ++a) by_d[g.d(a)].push_back(a);

  std::vector<Bisection> out;
  for (PtMask u = 0; u < (PtMask(1) << k0); ++u) {
    if (!s0.is_open(u)) continue;
    std::vector<Pt> pts;
    for (Pt p = 0; p < k0; ++p)
      if ((u >> p) & 1u) pts.push_back(p);

    Bisection cur;
    cur.domain = u;
    cur.arrow.assign(k0, no_pt);
    auto rec = [&](auto&& self, std::size_t idx) -> void {
      if (idx == pts.size()) {
        if (valid_bisection(g, cur, nullptr)) out.push_back(cur);
        return;
      }
      Pt p = pts[idx];
      for (Pt a : by_d[p]) {
        cur.arrow[p] = a;
        self(self, idx + 1);
      }
      cur.arrow[p] = no_pt;
    };
    rec(rec, 0);
  }
  return out;
}

Bisection unit_bisection(const FinGroupoid& g) {
  Bisection b;
  b.domain = (g.units() >= 32) ? ~PtMask(0) : (PtMask(1) << g.units()) - 1;
  b.arrow.assign(g.units(), no_pt);
  for (Pt p = 0; p < g.units(); ++p) b.arrow[p] = g.unit(p);
  return b;
}

Bisection compose_bisections(const FinGroupoid& g, const Bisection& s, const Bisection& t) {
  const std::size_t k0 = g.units();
  if (s.arrow.size() != k0 || t.arrow.size() != k0)
    throw UsageError("compose_bisections: section tables do not match the unit space");
  Bisection o;
  o.arrow.assign(k0, no_pt);
  for (Pt p = 0; p < k0; ++p) {
    if (t.arrow[p] == no_pt) continue;
    Pt q = g.r(t.arrow[p]);
    if (s.arrow[q] == no_pt) continue;
    if (!g.composable(s.arrow[q], t.arrow[p]))
      throw UsageError("compose_bisections: stages are not composable at " +
                       g.g0().point_name(p));
    o.arrow[p] = g.m(s.arrow[q], t.arrow[p]);
    o.domain |= PtMask(1) << p;
  }
  return o;
}

Bisection invert_bisection(const FinGroupoid& g, const Bisection& s) {
  const std::size_t k0 = g.units();
  if (s.arrow.size() != k0)
    throw UsageError("invert_bisection: section table does not match the unit space");
  Bisection o;
  o.arrow.assign(k0, no_pt);
  for (Pt p = 0; p < k0; ++p) {
    if (s.arrow[p] == no_pt) continue;
    Pt q = g.r(s.arrow[p]);
    o.arrow[q] = g.inv(s.arrow[p]);
    o.domain |= PtMask(1) << q;
  }
  return o;
}

GermCoverResult germ_cover(const FinGroupoid& g) {
  auto rep = validate_groupoid(g);
  if (!rep.valid || !rep.open)
    throw UsageError("germ_cover: " + g.name() + " must validate as an open groupoid");
  const FinSpace& s0 = g.g0();
  const FinSpace& s1 = g.g1();
  const std::size_t k0 = s0.points();
  std::string obj = "germ_cover(" + g.name() + ")";

  auto bs = bisections(g);

  std::vector<char> covered(g.arrows(), 0);
  for (const auto& b : bs)
    for (Pt p = 0; p < k0; ++p)
      if (b.arrow[p] != no_pt) covered[b.arrow[p]] = 1;
  for (Pt a = 0; a < g.arrows(); ++a)
    if (!covered[a])
      return {std::nullopt, fail_result("cover.coverable", obj,
                                        "arrow " + s1.point_name(a) +
                                            " lies in no local bisection")};

  // A germ is a bisection restricted to the minimal open neighbourhood of a
  // domain point, keyed by the point and the restricted table.
  std::map<std::pair<Pt, std::vector<Pt>>, Pt> id_of;
  for (const auto& b : bs)
    for (Pt p = 0; p < k0; ++p)
      if (b.arrow[p] != no_pt)
        id_of.emplace(std::make_pair(p, restrict_tab(b.arrow, s0.min_open(p))), Pt(0));
  if (id_of.size() > FinSpace::max_points)
    throw CapacityError("germ_cover: germ space exceeds the point cap");

  std::vector<Pt> at;
  std::vector<std::vector<Pt>> tab;
  for (auto& [key, id] : id_of) {
    id = Pt(at.size());
    at.push_back(key.first);
    tab.push_back(key.second);
  }
  const std::size_t n = at.size();

  auto find_germ = [&](Pt p, const std::vector<Pt>& t) -> Pt {
    auto it = id_of.find(std::make_pair(p, t));
    if (it == id_of.end())
      throw StructuralError("germ_cover: a derived germ escaped the bisection pseudogroup");
    return it->second;
  };

  // Names: arrow value at the base point, disambiguated only on collision.
  std::vector<std::string> names(n);
  std::map<std::string, int> uses, seen;
  for (std::size_t i = 0; i < n; ++i) ++uses[s1.point_name(tab[i][at[i]]) + "@" + s0.point_name(at[i])];
  for (std::size_t i = 0; i < n; ++i) {
    std::string base = s1.point_name(tab[i][at[i]]) + "@" + s0.point_name(at[i]);
    if (uses[base] > 1)
      names[i] = base + "#" + std::to_string(++seen[base]);
    else
      names[i] = base;
  }

  // Specialization: a germ refines to the germs of the same table at points
  // above its base point.
  std::vector<std::pair<Pt, Pt>> leq;
  for (Pt i = 0; i < n; ++i)
    for (Pt j = 0; j < n; ++j)
      if (s0.leq(at[i], at[j]) && tab[j] == restrict_tab(tab[i], s0.min_open(at[j])))
        leq.emplace_back(i, j);
  FinSpace g1hat(g.name() + ".cover1", names, leq);

  std::vector<Pt> dh(n), rh(n), ih(n), uh(k0), j1(n);
  for (Pt i = 0; i < n; ++i) {
    dh[i] = at[i];
    j1[i] = tab[i][at[i]];
    rh[i] = g.r(j1[i]);
  }
  Bisection ub = unit_bisection(g);
  for (Pt p = 0; p < k0; ++p) uh[p] = find_germ(p, restrict_tab(ub.arrow, s0.min_open(p)));
  for (Pt i = 0; i < n; ++i) {
    std::vector<Pt> inv_tab(k0, no_pt);
    for (Pt q = 0; q < k0; ++q) {
      if (tab[i][q] == no_pt) continue;
      inv_tab[g.r(tab[i][q])] = g.inv(tab[i][q]);
    }
    PtMask dom = 0;
    for (Pt q = 0; q < k0; ++q)
      if (inv_tab[q] != no_pt) dom |= PtMask(1) << q;
    if (dom != s0.min_open(rh[i]))
      throw StructuralError("germ_cover: inverse germ domain mismatch");
    ih[i] = find_germ(rh[i], inv_tab);
  }

  std::vector<Pt> mh(n * n, no_pt);
  for (Pt i = 0; i < n; ++i)
    for (Pt j = 0; j < n; ++j) {
      if (dh[i] != rh[j]) continue;
      std::vector<Pt> comp(k0, no_pt);
      for (Pt q = 0; q < k0; ++q) {
        if (tab[j][q] == no_pt) continue;
        Pt q2 = g.r(tab[j][q]);
        if (tab[i][q2] == no_pt)
          throw StructuralError("germ_cover: composite stage left its neighbourhood");
        comp[q] = g.m(tab[i][q2], tab[j][q]);
      }
      mh[std::size_t(i) * n + j] = find_germ(at[j], comp);
    }

  std::vector<Pt> j0(k0);
  for (Pt p = 0; p < k0; ++p) j0[p] = p;

  FinGroupoid ghat(g.name() + ".cover", s0, std::move(g1hat), std::move(dh), std::move(rh),
                   std::move(mh), std::move(ih), std::move(uh));
  return {CoverData{std::move(ghat), std::move(j0), std::move(j1)},
          pass_result("cover.coverable", obj)};
}

CoverAssembly assemble_cover(const FinGroupoid& g, CoverData cd) {
  auto rep = validate_groupoid(g);
  if (!rep.valid || !rep.open)
    throw UsageError("assemble_cover: " + g.name() + " must validate as an open groupoid");
  auto rhat = validate_groupoid(cd.ghat);
  if (!rhat.valid || !rhat.open)
    throw UsageError("assemble_cover: " + cd.ghat.name() +
                     " must validate as an open groupoid");
  if (cd.j0.size() != cd.ghat.units() || cd.j1.size() != cd.ghat.arrows())
    throw UsageError("assemble_cover: functor tables do not match the covering groupoid");
  for (Pt p : cd.j0)
    if (p >= g.units()) throw UsageError("assemble_cover: unit map out of range");
  for (Pt a : cd.j1)
    if (a >= g.arrows()) throw UsageError("assemble_cover: arrow map out of range");

  std::string obj = cd.ghat.name() + "->" + g.name();
  Quantale og = oquantale(g);
  Quantale oghat = oquantale(cd.ghat);
  SpatialFrame f1 = opens_of(g.g1());
  SpatialFrame f1h = opens_of(cd.ghat.g1());

  std::map<PtMask, Elt> hat_elt;
  for (Elt e = 0; e < Elt(f1h.mask.size()); ++e) hat_elt[f1h.mask[e]] = e;

  const std::size_t n = f1.mask.size();
  std::vector<Elt> j_tab(n);
  for (Elt a = 0; a < Elt(n); ++a) {
    PtMask pre = 0;
    for (Pt x = 0; x < cd.ghat.arrows(); ++x)
      if ((f1.mask[a] >> cd.j1[x]) & 1u) pre |= PtMask(1) << x;
    if (!cd.ghat.g1().is_open(pre))
      throw StructuralError("assemble_cover: the arrow map is not continuous (preimage of " +
                            og.lat().name(a) + " is not open)");
    j_tab[a] = hat_elt.at(pre);
  }
  SupMap j(og.lat_ptr(), oghat.lat_ptr(), std::move(j_tab));

  std::vector<CheckResult> checks;
  {
    CheckResult r = validate_supmap(j, obj);
    r.name = "cover.j_sup_map";
    checks.push_back(std::move(r));
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a)
      for (Elt b = a; b < Elt(n) && w.empty(); ++b) {
        if (j(og.lat().meet(a, b)) != oghat.lat().meet(j(a), j(b)))
          w = "meet not preserved at (" + og.lat().name(a) + "," + og.lat().name(b) + ")";
        else if (a != b && j(a) == j(b))
          w = "not injective: " + og.lat().name(a) + " and " + og.lat().name(b) +
              " share the image";
      }
    if (w.empty() && j(og.lat().top()) != oghat.lat().top()) w = "top not preserved";
    checks.push_back(w.empty() ? pass_result("cover.j_frame_mono", obj)
                               : fail_result("cover.j_frame_mono", obj, w));
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a)
      if (j(og.star(a)) != oghat.star(j(a)))
        w = "involution not preserved at " + og.lat().name(a);
    checks.push_back(w.empty() ? pass_result("cover.j_involution", obj)
                               : fail_result("cover.j_involution", obj, w));
  }
  // Independent route: an open of the cover decomposes into germ points of
  // its own bisections, so the preimage of a must equal the union, over all
  // cover bisections, of the germs whose value sits inside a.
  if (!rhat.etale) {
    checks.push_back(skipped_result("cover.j_formula_agreement", obj,
                                    "covering groupoid is not etale; no bisection route"));
  } else {
    auto bh = bisections(cd.ghat);
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a) {
      PtMask got = 0;
      for (const auto& b : bh)
        for (Pt p = 0; p < cd.ghat.units(); ++p) {
          if (b.arrow[p] == no_pt) continue;
          if ((f1.mask[a] >> cd.j1[b.arrow[p]]) & 1u) got |= PtMask(1) << b.arrow[p];
        }
      if (got != f1h.mask[j(a)])
        w = "preimage and bisection decomposition differ at " + og.lat().name(a);
    }
    checks.push_back(w.empty() ? pass_result("cover.j_formula_agreement", obj)
                               : incident_result("cover.j_formula_agreement", obj, w));
  }

  MonoMap adj = right_adjoint(j);
  return CoverAssembly{g,
                       std::move(cd.ghat),
                       std::move(cd.j0),
                       std::move(cd.j1),
                       std::move(og),
                       std::move(oghat),
                       std::move(f1.mask),
                       std::move(f1h.mask),
                       std::move(j),
                       std::move(adj.tab),
                       std::move(checks)};
}

namespace {

// The raw translation mask: arrows of s (through the arrow map) composed
// with the arrows of q wherever the ends meet in the base.
PtMask action_mask(const CoverAssembly& ca, PtMask sm, PtMask qm) {
  PtMask out = 0;
  for (Pt x = 0; x < ca.ghat.arrows(); ++x) {
    if (!((sm >> x) & 1u)) continue;
    Pt a = ca.j1[x];
    for (Pt h = 0; h < ca.base.arrows(); ++h) {
      if (!((qm >> h) & 1u)) continue;
      if (ca.base.d(a) != ca.base.r(h)) continue;
      out |= PtMask(1) << ca.base.m(a, h);
    }
  }
  return out;
}

Elt og_elt_by_mask(const CoverAssembly& ca, PtMask m) {
  for (Elt e = 0; e < Elt(ca.og_mask.size()); ++e)
    if (ca.og_mask[e] == m) return e;
  throw StructuralError("cover action produced a set that is not open in the base");
}

}  // namespace

Elt cover_action(const CoverAssembly& ca, Elt s, Elt q) {
  if (s >= ca.oghat.size() || q >= ca.og.size())
    throw UsageError("cover_action: element out of range");
  return og_elt_by_mask(ca, action_mask(ca, ca.oghat_mask[s], ca.og_mask[q]));
}

Elt bisection_action(const CoverAssembly& ca, Elt u, Elt q) {
  if (!ca.oghat.unital())
    throw UsageError("bisection_action: the covering quantale has no designated unit");
  Elt e = ca.oghat.unit();
  const SupLattice& lq = ca.oghat.lat();
  if (u >= ca.oghat.size() || !lq.leq(ca.oghat.mul(ca.oghat.star(u), u), e) ||
      !lq.leq(ca.oghat.mul(u, ca.oghat.star(u)), e))
    throw UsageError("bisection_action: not a partial unit");
  return cover_action(ca, u, q);
}

Bisection phi_transport(const CoverAssembly& ca, const Bisection& s) {
  const std::size_t k0h = ca.ghat.units();
  if (s.arrow.size() != k0h) throw UsageError("phi_transport: section table shape mismatch");
  Bisection o;
  o.arrow.assign(ca.base.units(), no_pt);
  for (Pt p = 0; p < k0h; ++p) {
    if (s.arrow[p] == no_pt) continue;
    Pt bp = ca.j0[p];
    o.domain |= PtMask(1) << bp;
    o.arrow[bp] = ca.j1[s.arrow[p]];
  }
  return o;
}

std::vector<CheckResult> check_phi_homomorphism(const CoverAssembly& ca) {
  std::string obj = ca.ghat.name() + "->" + ca.base.name();
  std::vector<CheckResult> out;
  auto bh = bisections(ca.ghat);

  {
    std::string w;
    for (const auto& b : bh) {
      std::string why;
      if (!valid_bisection(ca.base, phi_transport(ca, b), &why)) {
        w = "transport of " + bisection_name(ca.ghat, b) + " is not a bisection: " + why;
        break;
      }
    }
    out.push_back(w.empty() ? pass_result("cover.phi_bisection", obj)
                            : fail_result("cover.phi_bisection", obj, w));
  }
  {
    bool good = phi_transport(ca, unit_bisection(ca.ghat)) == unit_bisection(ca.base);
    out.push_back(good ? pass_result("cover.phi_unit", obj)
                       : fail_result("cover.phi_unit", obj,
                                     "unit section does not transport to the unit section"));
  }
  {
    std::string w;
    try {
      for (const auto& s : bh) {
        for (const auto& t : bh) {
          Bisection lhs = phi_transport(ca, compose_bisections(ca.ghat, s, t));
          Bisection rhs =
              compose_bisections(ca.base, phi_transport(ca, s), phi_transport(ca, t));
          if (!(lhs == rhs)) {
            w = "composition not preserved at " + bisection_name(ca.ghat, s) + " . " +
                bisection_name(ca.ghat, t);
            break;
          }
        }
        if (!w.empty()) break;
      }
    } catch (const UsageError& e) {
      w = e.what();
    }
    out.push_back(w.empty() ? pass_result("cover.phi_compose", obj)
                            : fail_result("cover.phi_compose", obj, w));
  }
  return out;
}

std::vector<CheckResult> check_etale_covered(const CoverAssembly& ca) {
  std::string obj = ca.ghat.name() + "->" + ca.base.name();
  std::vector<CheckResult> out;
  const FinSpace& s0 = ca.base.g0();
  const FinSpace& s1 = ca.base.g1();
  const FinSpace& s0h = ca.ghat.g0();
  const FinSpace& s1h = ca.ghat.g1();

  auto rhat = validate_groupoid(ca.ghat);
  out.push_back(rhat.etale
                    ? pass_result("cover.ghat_etale", obj)
                    : fail_result("cover.ghat_etale", obj,
                                  "d of the covering groupoid is not a local homeomorphism"));

  {
    std::string w;
    if (ca.ghat.units() != ca.base.units()) {
      w = "unit spaces have different sizes";
    } else {
      std::vector<char> hit(ca.base.units(), 0);
      for (Pt p = 0; p < ca.ghat.units() && w.empty(); ++p) {
        if (hit[ca.j0[p]]) w = "unit map not injective at " + s0h.point_name(p);
        hit[ca.j0[p]] = 1;
      }
      for (Pt p = 0; p < ca.ghat.units() && w.empty(); ++p)
        for (Pt q = 0; q < ca.ghat.units() && w.empty(); ++q)
          if (s0h.leq(p, q) != s0.leq(ca.j0[p], ca.j0[q]))
            w = "unit map is not an order isomorphism at (" + s0h.point_name(p) + "," +
                s0h.point_name(q) + ")";
    }
    out.push_back(w.empty() ? pass_result("cover.j0_iso", obj)
                            : fail_result("cover.j0_iso", obj, w));
  }

  {
    std::string w;
    for (Pt x = 0; x < ca.ghat.arrows() && w.empty(); ++x)
      for (Pt y = 0; y < ca.ghat.arrows() && w.empty(); ++y)
        if (s1h.leq(x, y) && !s1.leq(ca.j1[x], ca.j1[y]))
          w = "arrow map not continuous at " + s1h.point_name(x) + " <= " + s1h.point_name(y);
    for (Pt x = 0; x < ca.ghat.arrows() && w.empty(); ++x) {
      if (ca.base.d(ca.j1[x]) != ca.j0[ca.ghat.d(x)])
        w = "d not preserved at " + s1h.point_name(x);
      else if (ca.base.r(ca.j1[x]) != ca.j0[ca.ghat.r(x)])
        w = "r not preserved at " + s1h.point_name(x);
      else if (ca.j1[ca.ghat.inv(x)] != ca.base.inv(ca.j1[x]))
        w = "inverse not preserved at " + s1h.point_name(x);
    }
    for (Pt p = 0; p < ca.ghat.units() && w.empty(); ++p)
      if (ca.j1[ca.ghat.unit(p)] != ca.base.unit(ca.j0[p]))
        w = "unit arrow not preserved at " + s0h.point_name(p);
    for (Pt x = 0; x < ca.ghat.arrows() && w.empty(); ++x)
      for (Pt y = 0; y < ca.ghat.arrows() && w.empty(); ++y) {
        if (!ca.ghat.composable(x, y)) continue;
        if (!ca.base.composable(ca.j1[x], ca.j1[y]))
          w = "image pair not composable at (" + s1h.point_name(x) + "," + s1h.point_name(y) +
              ")";
        else if (ca.j1[ca.ghat.m(x, y)] != ca.base.m(ca.j1[x], ca.j1[y]))
          w = "multiplication not preserved at (" + s1h.point_name(x) + "," +
              s1h.point_name(y) + ")";
      }
    out.push_back(w.empty() ? pass_result("cover.functor", obj)
                            : fail_result("cover.functor", obj, w));
  }

  {
    std::vector<char> im(ca.base.arrows(), 0);
    for (Pt x = 0; x < ca.ghat.arrows(); ++x) im[ca.j1[x]] = 1;
    auto defect = frame_epi_defect(s1, im);
    out.push_back(!defect ? pass_result("cover.j1_epi", obj)
                          : fail_result("cover.j1_epi", obj,
                                        "opens cannot be recovered from the image near " +
                                            s1.point_name(*defect)));
  }

  if (!ca.oghat.unital()) {
    out.push_back(skipped_result("cover.jstar_equivariant", obj,
                                 "covering quantale has no designated unit"));
  } else {
    std::string w;
    try {
      auto pu = partial_units(ca.oghat);
      for (Elt u : pu.elements) {
        for (Elt q = 0; q < Elt(ca.og.size()); ++q) {
          if (ca.j(cover_action(ca, u, q)) != ca.oghat.mul(u, ca.j(q))) {
            w = "preimage not equivariant at (" + ca.oghat.lat().name(u) + "," +
                ca.og.lat().name(q) + ")";
            break;
          }
        }
        if (!w.empty()) break;
      }
    } catch (const StructuralError& e) {
      w = e.what();
    }
    out.push_back(w.empty() ? pass_result("cover.jstar_equivariant", obj)
                            : fail_result("cover.jstar_equivariant", obj, w));
  }

  {
    std::string w;
    try {
      std::vector<Pt> dj(ca.ghat.arrows());
      for (Pt x = 0; x < ca.ghat.arrows(); ++x) dj[x] = ca.j0[ca.ghat.d(x)];
      CMap f(&s1h, &s0, std::move(dj));
      CMap rb(&s1, &s0, ca.base.r_table());
      CMap db(&s1, &s0, ca.base.d_table());
      PullbackSpace phat = pullback(f, rb, ca.ghat.name() + ".mixed2");
      PullbackSpace pbase = pullback(db, rb, ca.base.name() + ".G2");
      std::vector<char> im(pbase.space.points(), 0);
      for (Pt t = 0; t < phat.space.points() && w.empty(); ++t) {
        auto [x, h] = phat.pairs[t];
        auto id = pbase.pair_id(ca.j1[x], h);
        if (!id)
          w = "image pair not composable at " + phat.space.point_name(t);
        else
          im[*id] = 1;
      }
      if (w.empty()) {
        auto defect = frame_epi_defect(pbase.space, im);
        if (defect)
          w = "opens of the composable-pairs space cannot be recovered near " +
              pbase.space.point_name(*defect);
      }
    } catch (const StructuralError& e) {
      w = e.what();
    }
    out.push_back(w.empty() ? pass_result("cover.j1xid_epi", obj)
                            : fail_result("cover.j1xid_epi", obj, w));
  }
  return out;
}

IEQFData assemble_ieqf(const CoverAssembly& ca) {
  if (!ca.og.base().same_order_as(ca.oghat.base()))
    throw UsageError("assemble_ieqf: base frames are not aligned");
  const std::size_t n = ca.og.size(), nh = ca.oghat.size();
  std::map<PtMask, Elt> og_elt;
  for (Elt e = 0; e < Elt(n); ++e) og_elt[ca.og_mask[e]] = e;
  std::vector<Elt> lact(nh * n);
  for (Elt s = 0; s < Elt(nh); ++s)
    for (Elt q = 0; q < Elt(n); ++q) {
      PtMask m = action_mask(ca, ca.oghat_mask[s], ca.og_mask[q]);
      auto it = og_elt.find(m);
      if (it == og_elt.end())
        throw StructuralError("assemble_ieqf: action produced a set that is not open");
      lact[std::size_t(s) * n + q] = it->second;
    }
  return IEQFData{ca.og, ca.oghat, ca.j, std::move(lact)};
}

std::vector<CheckResult> check_inverse_embedded(const IEQFData& d, std::size_t max_cells) {
  const Quantale& O = d.og;
  const Quantale& Q = d.oghat;
  const SupLattice& lo = O.lat();
  const SupLattice& lq = Q.lat();
  const std::size_t n = lo.size(), nh = lq.size();
  std::string obj = O.name() + " in " + Q.name();
  std::vector<CheckResult> out;

  if (d.j.table().size() != n || d.lact.size() != nh * n)
    throw UsageError("check_inverse_embedded: table shapes do not match the quantales");
  if (!O.has_base() || !Q.has_base())
    throw UsageError("check_inverse_embedded: both quantales need a base");
  if (!O.base().same_order_as(Q.base()))
    throw UsageError("check_inverse_embedded: base frames are not aligned");
  if (!Q.unital()) {
    out.push_back(fail_result("ieq.qhat_iqf", obj, "no designated unit"));
    return out;
  }
  const Elt eh = Q.unit();

  try {
    Classification c = classify(Q, max_cells);
    out.push_back(c.inverse_quantal_frame ? pass_result("ieq.qhat_iqf", obj)
                                          : fail_result("ieq.qhat_iqf", obj, c.failing_iqf));
  } catch (const UsageError& e) {
    out.push_back(fail_result("ieq.qhat_iqf", obj, e.what()));
  }
  out.push_back(fold_into(
      "ieq.embedded_quantal_frame", obj,
      validate_quantale(O, {Package::involutive, Package::based, Package::quantal_frame})));

  // Action laws.  The cubic scans are guarded; the guard is a size scope,
  // not a verdict.
  const bool big = nh * nh * n > (std::size_t(1) << 26) || nh * n * n > (std::size_t(1) << 26);
  {
    std::string w;
    for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
      if (d.act(eh, x) != x) w = "e.x != x at " + lo.name(x);
    out.push_back(w.empty() ? pass_result("ieq.module_unital", obj)
                            : fail_result("ieq.module_unital", obj, w));
  }
  if (big) {
    out.push_back(skipped_result("ieq.module_assoc", obj, "action law scan exceeds the cell guard"));
    out.push_back(skipped_result("ieq.module_joins", obj, "action law scan exceeds the cell guard"));
    out.push_back(skipped_result("ieq.bimodule_compat", obj, "action law scan exceeds the cell guard"));
    out.push_back(skipped_result("ieq.qq_product_compat", obj, "action law scan exceeds the cell guard"));
  } else {
    {
      std::string w;
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        for (Elt t = 0; t < Elt(nh) && w.empty(); ++t)
          for (Elt x = 0; x < Elt(n); ++x)
            if (d.act(Q.mul(s, t), x) != d.act(s, d.act(t, x))) {
              w = "(st).x != s.(t.x) at (" + lq.name(s) + "," + lq.name(t) + "," + lo.name(x) +
                  ")";
              break;
            }
      out.push_back(w.empty() ? pass_result("ieq.module_assoc", obj)
                              : fail_result("ieq.module_assoc", obj, w));
    }
    {
      std::string w;
      for (Elt x = 0; x < Elt(n) && w.empty(); ++x) {
        if (d.act(lq.bottom(), x) != lo.bottom()) w = "bottom.x != bottom at " + lo.name(x);
      }
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        if (d.act(s, lo.bottom()) != lo.bottom()) w = "s.bottom != bottom at " + lq.name(s);
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        for (Elt t = 0; t < Elt(nh) && w.empty(); ++t)
          for (Elt x = 0; x < Elt(n); ++x)
            if (d.act(lq.join(s, t), x) != lo.join(d.act(s, x), d.act(t, x))) {
              w = "join in the first slot fails at (" + lq.name(s) + "," + lq.name(t) + "," +
                  lo.name(x) + ")";
              break;
            }
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
          for (Elt y = 0; y < Elt(n); ++y)
            if (d.act(s, lo.join(x, y)) != lo.join(d.act(s, x), d.act(s, y))) {
              w = "join in the second slot fails at (" + lq.name(s) + "," + lo.name(x) + "," +
                  lo.name(y) + ")";
              break;
            }
      out.push_back(w.empty() ? pass_result("ieq.module_joins", obj)
                              : fail_result("ieq.module_joins", obj, w));
    }
    {
      std::string w;
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
          for (Elt t = 0; t < Elt(nh); ++t)
            if (d.ract(d.act(s, x), t) != d.act(s, d.ract(x, t))) {
              w = "(s.x).t != s.(x.t) at (" + lq.name(s) + "," + lo.name(x) + "," + lq.name(t) +
                  ")";
              break;
            }
      out.push_back(w.empty() ? pass_result("ieq.bimodule_compat", obj)
                              : fail_result("ieq.bimodule_compat", obj, w));
    }
    {
      std::string w;
      for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
        for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
          for (Elt y = 0; y < Elt(n); ++y) {
            if (O.mul(d.act(s, x), y) != d.act(s, O.mul(x, y))) {
              w = "(s.x)y != s.(xy) at (" + lq.name(s) + "," + lo.name(x) + "," + lo.name(y) +
                  ")";
              break;
            }
            if (O.mul(d.ract(x, s), y) != O.mul(x, d.act(s, y))) {
              w = "(x.s)y != x(s.y) at (" + lo.name(x) + "," + lq.name(s) + "," + lo.name(y) +
                  ")";
              break;
            }
            if (d.ract(O.mul(x, y), s) != O.mul(x, d.ract(y, s))) {
              w = "(xy).s != x(y.s) at (" + lo.name(x) + "," + lo.name(y) + "," + lq.name(s) +
                  ")";
              break;
            }
          }
      out.push_back(w.empty() ? pass_result("ieq.qq_product_compat", obj)
                              : fail_result("ieq.qq_product_compat", obj, w));
    }
  }

  // The embedding itself.
  bool j_supmap_ok = false;
  {
    CheckResult r = validate_supmap(d.j, obj);
    r.name = "ieq.j_sup_map";
    j_supmap_ok = r.ok();
    out.push_back(std::move(r));
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a)
      for (Elt b = a; b < Elt(n) && w.empty(); ++b) {
        if (d.j(lo.meet(a, b)) != lq.meet(d.j(a), d.j(b)))
          w = "meet not preserved at (" + lo.name(a) + "," + lo.name(b) + ")";
        else if (a != b && d.j(a) == d.j(b))
          w = "not injective: " + lo.name(a) + " and " + lo.name(b) + " share the image";
      }
    if (w.empty() && d.j(lo.top()) != lq.top()) w = "top not preserved";
    out.push_back(w.empty() ? pass_result("ieq.j_frame_mono", obj)
                            : fail_result("ieq.j_frame_mono", obj, w));
  }
  {
    std::string w;
    for (Elt s = 0; s < Elt(nh) && w.empty(); ++s)
      for (Elt x = 0; x < Elt(n); ++x) {
        if (d.j(d.act(s, x)) != Q.mul(s, d.j(x))) {
          w = "j(s.x) != s j(x) at (" + lq.name(s) + "," + lo.name(x) + ")";
          break;
        }
        if (d.j(d.ract(x, s)) != Q.mul(d.j(x), s)) {
          w = "j(x.s) != j(x) s at (" + lo.name(x) + "," + lq.name(s) + ")";
          break;
        }
      }
    out.push_back(w.empty() ? pass_result("ieq.j_bimodule_hom", obj)
                            : fail_result("ieq.j_bimodule_hom", obj, w));
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a)
      if (d.j(O.star(a)) != Q.star(d.j(a)))
        w = "j(a*) != j(a)* at " + lo.name(a);
    out.push_back(w.empty() ? pass_result("ieq.item_a_involution", obj)
                            : fail_result("ieq.item_a_involution", obj, w));
  }

  TensorCtx ctx_oo = quantale_tensor_ctx(O);
  TensorCtx ctx_hat = quantale_tensor_ctx(Q);
  {
    // j (x) id must embed the tensor square of the embedded frame.
    try {
      TensorBase tb;
      tb.base = Q.base_ptr();
      tb.ract = Q.based().rres;
      tb.lact = O.based().lres;
      TensorCtx ctx_qo = TensorContext::over_base(Q.lat_ptr(), O.lat_ptr(), tb);
      TensorLattice t_oo = enumerate_tensor(ctx_oo, max_cells);
      TensorLattice t_qo = enumerate_tensor(ctx_qo, max_cells);
      SupMap f = map_tensor(t_oo, t_qo, d.j, SupMap::identity(O.lat_ptr()));
      std::string w;
      const std::size_t tn = t_oo.lat->size();
      for (Elt a = 0; a < Elt(tn) && w.empty(); ++a)
        for (Elt b = a; b < Elt(tn) && w.empty(); ++b) {
          if (f(t_oo.lat->meet(a, b)) != t_qo.lat->meet(f(a), f(b)))
            w = "tensor meet not preserved at (" + t_oo.elts[a].describe() + "," +
                t_oo.elts[b].describe() + ")";
          else if (a != b && f(a) == f(b))
            w = "tensor map not injective: " + t_oo.elts[a].describe() + " and " +
                t_oo.elts[b].describe() + " share the image";
        }
      if (w.empty() && f(t_oo.lat->top()) != t_qo.lat->top()) w = "tensor top not preserved";
      out.push_back(w.empty() ? pass_result("ieq.item_b_tensor_mono", obj)
                              : fail_result("ieq.item_b_tensor_mono", obj, w));
    } catch (const CapacityError& e) {
      out.push_back(skipped_result("ieq.item_b_tensor_mono", obj, e.what()));
    }
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a) {
      BiIdeal lhs(ctx_hat, mu_star_row(Q, d.j(a)));
      BiIdeal rhs = map_bi_ideal(BiIdeal(ctx_oo, mu_star_row(O, a)), d.j, d.j, ctx_hat);
      if (!(lhs == rhs)) w = "comultiplications disagree at " + lo.name(a);
    }
    out.push_back(w.empty() ? pass_result("ieq.item_c_comult_compat", obj)
                            : fail_result("ieq.item_c_comult_compat", obj, w));
  }
  {
    std::vector<Elt> xxs(n);
    for (Elt x = 0; x < Elt(n); ++x) xxs[x] = O.mul(x, O.star(x));
    std::string w, strict;
    for (Elt a = 0; a < Elt(n); ++a) {
      Elt lhs = Q.mul(lq.meet(d.j(a), eh), lq.top());
      Elt rhs = lq.bottom();
      for (Elt x = 0; x < Elt(n); ++x)
        if (lo.leq(xxs[x], a)) rhs = lq.join(rhs, d.j(x));
      if (!lq.leq(lhs, rhs)) {
        w = "(j(a) /\\ e)1 exceeds the partial-unit join at " + lo.name(a);
        break;
      }
      if (lhs != rhs && strict.empty()) strict = lo.name(a);
    }
    out.push_back(w.empty() ? pass_result("ieq.item_d_inverse_bound", obj)
                            : fail_result("ieq.item_d_inverse_bound", obj, w));
    if (w.empty())
      out.push_back(CheckResult{"ieq.item_d_equality", obj, Verdict::pass,
                                strict.empty() ? "equality holds at every element"
                                               : "inequality strict at " + strict});
  }
  {
    std::vector<char> im(nh, 0);
    for (Elt x = 0; x < Elt(n); ++x) im[d.j(x)] = 1;
    std::string w;
    for (Elt y : right_sided(Q).elements)
      if (!im[y]) {
        w = "right-sided " + lq.name(y) + " is outside the image";
        break;
      }
    out.push_back(w.empty() ? pass_result("ieq.item_e_rs_into_image", obj)
                            : fail_result("ieq.item_e_rs_into_image", obj, w));
  }

  // Everything after this point is a consequence of the definition, so a
  // violation while the definition holds is an incident.
  bool defn_ok = true;
  for (const auto& r : out)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) defn_ok = false;
  auto lemma = [&](const std::string& name, const std::string& w) {
    if (w.empty()) return pass_result(name, obj);
    return defn_ok ? incident_result(name, obj, w) : fail_result(name, obj, w);
  };

  {
    std::string w;
    for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
      for (Elt y = 0; y < Elt(n); ++y)
        if (!lq.leq(Q.mul(d.j(x), d.j(y)), d.j(O.mul(x, y)))) {
          w = "j(x)j(y) not below j(xy) at (" + lo.name(x) + "," + lo.name(y) + ")";
          break;
        }
    out.push_back(lemma("ieq.lemma_lax_mult", w));
  }
  {
    std::string w;
    for (Elt x = 0; x < Elt(n) && w.empty(); ++x) {
      Elt x1 = O.mul(x, lo.top());
      if (Q.mul(d.j(x1), lq.top()) != d.j(x1))
        w = "j(x1)1 != j(x1) at " + lo.name(x);
      else if (!lq.leq(Q.mul(d.j(x), lq.top()), d.j(x1)))
        w = "j(x)1 not below j(x1) at " + lo.name(x);
      else if (d.act(d.j(x1), lo.top()) != x1)
        w = "j(x1).1 != x1 at " + lo.name(x);
    }
    out.push_back(lemma("ieq.lemma_right_sided", w));
  }
  {
    std::string w;
    for (Elt x = 0; x < Elt(n) && w.empty(); ++x)
      for (Elt y = 0; y < Elt(n); ++y)
        if (!lo.leq(d.act(d.j(x), y), O.mul(x, y))) {
          w = "j(x).y not below xy at (" + lo.name(x) + "," + lo.name(y) + ")";
          break;
        }
    out.push_back(lemma("ieq.lemma_action_dominated", w));
  }
  {
    // Comultiplication of an embedded element through the partial units.
    std::vector<Elt> iu = partial_units(Q).elements;
    std::string w;
    for (Elt a = 0; a < Elt(n) && w.empty(); ++a) {
      Elt ja = d.j(a);
      std::vector<Elt> seed(nh, lq.bottom());
      for (Elt u : iu)
        for (Elt v : iu)
          if (lq.leq(v, ja)) seed[u] = lq.join(seed[u], Q.mul(Q.star(u), v));
      BiIdeal rhs(ctx_hat, std::move(seed));
      BiIdeal lhs(ctx_hat, mu_star_row(Q, ja));
      if (!(lhs == rhs)) w = "partial-unit decomposition misses the comultiplication at " +
                             lo.name(a);
    }
    out.push_back(lemma("ieq.lemma_comult_partial_units", w));
  }
  {
    std::vector<Elt> rso = right_sided(O).elements;
    std::vector<Elt> rsq = right_sided(Q).elements;
    std::string w;
    std::vector<char> in_rsq(nh, 0);
    for (Elt y : rsq) in_rsq[y] = 1;
    std::vector<char> hit(nh, 0);
    for (Elt x : rso) {
      if (!in_rsq[d.j(x)]) {
        w = "j(" + lo.name(x) + ") is not right-sided";
        break;
      }
      if (hit[d.j(x)]) {
        w = "restriction not injective at " + lo.name(x);
        break;
      }
      hit[d.j(x)] = 1;
    }
    if (w.empty())
      for (Elt y : rsq)
        if (!hit[y]) {
          w = "right-sided " + lq.name(y) + " is not reached";
          break;
        }
    if (w.empty())
      for (Elt x : rso) {
        for (Elt y : rso)
          if (lo.leq(x, y) != lq.leq(d.j(x), d.j(y))) {
            w = "order not reflected at (" + lo.name(x) + "," + lo.name(y) + ")";
            break;
          }
        if (!w.empty()) break;
      }
    out.push_back(lemma("ieq.lemma_jprime_order_iso", w));
  }
  if (!Q.has_support()) {
    out.push_back(skipped_result("ieq.lemma_support_transport", obj,
                                 "covering quantale carries no support"));
  } else {
    std::vector<Elt> s2(n);
    for (Elt x = 0; x < Elt(n); ++x) s2[x] = Q.spp(d.j(x));
    std::vector<Elt> mt(n * n);
    std::vector<Elt> iv(n);
    for (Elt x = 0; x < Elt(n); ++x) {
      iv[x] = O.star(x);
      for (Elt y = 0; y < Elt(n); ++y) mt[std::size_t(x) * n + y] = O.mul(x, y);
    }
    Quantale tmp(O.name(), O.lat_ptr(), std::move(mt), std::move(iv),
                 O.unital() ? O.unit() : no_elt);
    tmp.attach_base(O.based());
    tmp.attach_support(std::move(s2));
    CheckResult folded = fold_into("ieq.lemma_support_transport", obj,
                                   validate_quantale(tmp, {Package::supported,
                                                           Package::equivariant}));
    out.push_back(lemma("ieq.lemma_support_transport",
                        folded.ok() ? std::string() : folded.witness));
    if (O.has_support()) {
      std::string w;
      for (Elt x = 0; x < Elt(n); ++x)
        if (tmp.spp(x) != O.spp(x)) {
          w = "transported support differs from the attached one at " + lo.name(x);
          break;
        }
      out.push_back(lemma("ieq.lemma_support_agrees", w));
    }
  }
  if (!j_supmap_ok) {
    out.push_back(skipped_result("ieq.lemma_jstar_equivariant", obj,
                                 "embedding is not join-preserving"));
    out.push_back(skipped_result("ieq.lemma_jstar_kills_units", obj,
                                 "embedding is not join-preserving"));
  } else {
    MonoMap jst = right_adjoint(d.j);
    std::vector<Elt> iu = partial_units(Q).elements;
    {
      std::string w;
      for (Elt s : iu) {
        for (Elt x = 0; x < Elt(nh); ++x)
          if (d.act(s, jst(x)) != jst(Q.mul(s, x))) {
            w = "s.j_*(x) != j_*(sx) at (" + lq.name(s) + "," + lq.name(x) + ")";
            break;
          }
        if (!w.empty()) break;
      }
      out.push_back(lemma("ieq.lemma_jstar_equivariant", w));
    }
    if (O.unital()) {
      out.push_back(skipped_result(
          "ieq.lemma_jstar_kills_units", obj,
          "embedded quantale is unital; the vanishing argument needs a unitless embedded part"));
    } else {
      std::string w;
      for (Elt u : iu)
        if (jst(u) != lo.bottom()) {
          w = "j_*(" + lq.name(u) + ") is not bottom";
          break;
        }
      out.push_back(lemma("ieq.lemma_jstar_kills_units", w));
    }
  }
  {
    // The image with the transported product is a copy of the embedded
    // quantale; whether it agrees with the ambient product is informative.
    std::string note = "transported product coincides with the ambient multiplication";
    bool agree = true;
    for (Elt a = 0; a < Elt(n) && agree; ++a)
      for (Elt b = 0; b < Elt(n); ++b)
        if (d.j(O.mul(a, b)) != Q.mul(d.j(a), d.j(b))) {
          note = "transported product differs from the ambient one at (" + lo.name(a) + "," +
                 lo.name(b) + ")";
          agree = false;
          break;
        }
    out.push_back(CheckResult{"ieq.transported_product_note", obj, Verdict::pass, note});
  }
  return out;
}

}  // namespace qf
