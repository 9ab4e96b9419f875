#include "qforge/groupoid.hpp"

namespace qf {

FinGroupoid::FinGroupoid(std::string name, FinSpace g0, FinSpace g1, std::vector<Pt> d,
                         std::vector<Pt> r, std::vector<Pt> m, std::vector<Pt> i,
                         std::vector<Pt> u)
    : name_(std::move(name)), g0_(std::move(g0)), g1_(std::move(g1)), d_(std::move(d)),
      r_(std::move(r)), m_(std::move(m)), i_(std::move(i)), u_(std::move(u)) {
  const std::size_t k0 = g0_.points(), k1 = g1_.points();
  if (d_.size() != k1 || r_.size() != k1 || i_.size() != k1)
    throw StructuralError("groupoid " + name_ + ": arrow map table sizes are wrong");
  if (u_.size() != k0) throw StructuralError("groupoid " + name_ + ": unit table size is wrong");
  if (m_.size() != k1 * k1)
    throw StructuralError("groupoid " + name_ + ": multiplication table size is wrong");
  for (Pt v : d_)
    if (v >= k0) throw StructuralError("groupoid " + name_ + ": d references unknown unit point");
  for (Pt v : r_)
    if (v >= k0) throw StructuralError("groupoid " + name_ + ": r references unknown unit point");
  for (Pt v : i_)
    if (v >= k1) throw StructuralError("groupoid " + name_ + ": i references unknown arrow");
  for (Pt v : u_)
    if (v >= k1) throw StructuralError("groupoid " + name_ + ": u references unknown arrow");
  for (std::size_t g = 0; g < k1; ++g)
    for (std::size_t h = 0; h < k1; ++h) {
      Pt v = m_[g * k1 + h];
      bool comp = d_[g] == r_[h];
      if (comp && v >= k1)
        throw StructuralError("groupoid " + name_ + ": product of composable pair (" +
                              g1_.point_name(Pt(g)) + ", " + g1_.point_name(Pt(h)) +
                              ") is missing");
      if (!comp && v != no_pt)
        throw StructuralError("groupoid " + name_ + ": product defined on non-composable pair (" +
                              g1_.point_name(Pt(g)) + ", " + g1_.point_name(Pt(h)) + ")");
    }
}

Pt FinGroupoid::m(Pt g, Pt h) const {
  if (!composable(g, h))
    throw UsageError("groupoid " + name_ + ": pair (" + g1_.point_name(g) + ", " +
                     g1_.point_name(h) + ") is not composable");
  return m_[std::size_t(g) * g1_.points() + h];
}

namespace {

// Monotone table check without constructing a CMap, so that a broken map
// yields a witness instead of an exception.
bool monotone_table(const FinSpace& src, const FinSpace& tgt, const std::vector<Pt>& tab,
                    std::string& witness) {
  for (std::size_t p = 0; p < src.points(); ++p)
    for (std::size_t q = 0; q < src.points(); ++q)
      if (src.leq(Pt(p), Pt(q)) && !tgt.leq(tab[p], tab[q])) {
        witness = src.point_name(Pt(p)) + " <= " + src.point_name(Pt(q)) + " but values " +
                  tgt.point_name(tab[p]) + " !<= " + tgt.point_name(tab[q]);
        return false;
      }
  return true;
}

}  // namespace

GroupoidReport validate_groupoid(const FinGroupoid& g) {
  GroupoidReport rep;
  auto& out = rep.checks;
  const FinSpace& s0 = g.g0();
  const FinSpace& s1 = g.g1();
  const std::size_t k0 = s0.points(), k1 = s1.points();
  const std::string& obj = g.name();

  bool algebra = true;
  {
    CheckResult r = pass_result("groupoid.unit_section", obj);
    for (Pt p = 0; p < k0; ++p)
      if (g.d(g.unit(p)) != p || g.r(g.unit(p)) != p) {
        r = fail_result("groupoid.unit_section", obj, "d or r of u(" + s0.point_name(p) +
                                                          ") is not " + s0.point_name(p));
        break;
      }
    algebra &= r.ok();
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("groupoid.unit_laws", obj);
    for (Pt a = 0; a < k1; ++a) {
      Pt lu = g.unit(g.r(a)), ru = g.unit(g.d(a));
      if (!g.composable(lu, a) || !g.composable(a, ru) || g.m(lu, a) != a || g.m(a, ru) != a) {
        r = fail_result("groupoid.unit_laws", obj, "at arrow " + s1.point_name(a));
        break;
      }
    }
    algebra &= r.ok();
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("groupoid.compose_ends", obj);
    for (Pt a = 0; a < k1 && r.ok(); ++a)
      for (Pt b = 0; b < k1; ++b)
        if (g.composable(a, b)) {
          Pt p = g.m(a, b);
          if (g.d(p) != g.d(b) || g.r(p) != g.r(a)) {
            r = fail_result("groupoid.compose_ends", obj,
                            "ends of " + s1.point_name(a) + " . " + s1.point_name(b));
            break;
          }
        }
    algebra &= r.ok();
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("groupoid.inverses", obj);
    for (Pt a = 0; a < k1; ++a) {
      Pt ia = g.inv(a);
      if (g.d(ia) != g.r(a) || g.r(ia) != g.d(a)) {
        r = fail_result("groupoid.inverses", obj, "ends of i(" + s1.point_name(a) + ")");
        break;
      }
      if (!g.composable(ia, a) || !g.composable(a, ia) || g.m(ia, a) != g.unit(g.d(a)) ||
          g.m(a, ia) != g.unit(g.r(a))) {
        r = fail_result("groupoid.inverses", obj, "i(" + s1.point_name(a) + ") is not inverse");
        break;
      }
      if (g.inv(ia) != a) {
        r = fail_result("groupoid.inverses", obj, "i is not involutive at " + s1.point_name(a));
        break;
      }
    }
    algebra &= r.ok();
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("groupoid.assoc", obj);
    for (Pt a = 0; a < k1 && r.ok(); ++a)
      for (Pt b = 0; b < k1 && r.ok(); ++b) {
        if (!g.composable(a, b)) continue;
        for (Pt c = 0; c < k1; ++c)
          if (g.composable(b, c) && g.m(g.m(a, b), c) != g.m(a, g.m(b, c))) {
            r = fail_result("groupoid.assoc", obj,
                            "(" + s1.point_name(a) + ", " + s1.point_name(b) + ", " +
                                s1.point_name(c) + ")");
            break;
          }
      }
    algebra &= r.ok();
    out.push_back(std::move(r));
  }

  bool cont = true;
  {
    std::string w;
    auto check_map = [&](const char* name, const FinSpace& src, const FinSpace& tgt,
                         const std::vector<Pt>& tab) {
      bool ok = monotone_table(src, tgt, tab, w);
      cont &= ok;
      out.push_back(ok ? pass_result(std::string("groupoid.continuity.") + name, obj)
                       : fail_result(std::string("groupoid.continuity.") + name, obj, w));
    };
    check_map("d", s1, s0, g.d_table());
    check_map("r", s1, s0, g.r_table());
    check_map("i", s1, s1, g.i_table());
    check_map("u", s0, s1, g.u_table());
    // multiplication lives on the composable-pairs subspace of the product
    CheckResult r = pass_result("groupoid.continuity.m", obj);
    for (Pt a = 0; a < k1 && r.ok(); ++a)
      for (Pt b = 0; b < k1 && r.ok(); ++b) {
        if (!g.composable(a, b)) continue;
        for (Pt c = 0; c < k1 && r.ok(); ++c)
          for (Pt e = 0; e < k1; ++e) {
            if (!g.composable(c, e)) continue;
            if (s1.leq(a, c) && s1.leq(b, e) && !s1.leq(g.m(a, b), g.m(c, e))) {
              r = fail_result("groupoid.continuity.m", obj,
                              "(" + s1.point_name(a) + ", " + s1.point_name(b) + ") <= (" +
                                  s1.point_name(c) + ", " + s1.point_name(e) +
                                  ") but the products are not ordered");
              break;
            }
          }
      }
    cont &= r.ok();
    out.push_back(std::move(r));
  }

  rep.valid = algebra && cont;
  if (!rep.valid) return rep;

  // With valid data the structure maps exist as genuine continuous maps.
  CMap d(&s1, &s0, g.d_table());
  MapClass dc = classify_map(d);
  rep.open = dc.open;
  rep.etale = dc.local_homeo;
  {
    // openness and etaleness are classifications, not axioms
    CheckResult r = pass_result("groupoid.classification", obj);
    r.witness = rep.etale ? "open, etale" : rep.open ? "open, not etale" : "not open";
    if (!rep.open) r.witness += ": " + dc.witness;
    out.push_back(std::move(r));
  }
  if (rep.open) {
    // r = d o i with i a homeomorphism, so r must be open too
    CMap r(&s1, &s0, g.r_table());
    MapClass rc = classify_map(r);
    out.push_back(rc.open ? pass_result("groupoid.r_open_derived", obj)
                          : incident_result("groupoid.r_open_derived", obj,
                                            "d is open but r is not: " + rc.witness));
    // openness of the multiplication, on the composable-pairs subspace
    PullbackSpace g2 = pullback(d, r, g.name() + ".G2");
    std::vector<Pt> mt(g2.pairs.size());
    for (std::size_t i = 0; i < g2.pairs.size(); ++i)
      mt[i] = g.m(g2.pairs[i].first, g2.pairs[i].second);
    CMap m(&g2.space, &s1, mt);
    MapClass mc = classify_map(m);
    out.push_back(mc.open ? pass_result("groupoid.m_open_derived", obj)
                          : incident_result("groupoid.m_open_derived", obj,
                                            "d is open but m is not: " + mc.witness));
  }
  return rep;
}

Quantale oquantale(const FinGroupoid& g, Side side) {
  // The source-side convention is the range-side convention of the opposite
  // groupoid: the product reverses and the restrictions read along d, which
  // is what the based axioms force once the left restriction follows the end
  // preserved by left multiplication.
  if (side == Side::source) return oquantale(opposite_groupoid(g), Side::range);

  GroupoidReport rep = validate_groupoid(g);
  if (!rep.valid) {
    for (const CheckResult& r : rep.checks)
      if (!r.ok()) throw UsageError("oquantale(" + g.name() + "): " + r.name + ": " + r.witness);
    throw UsageError("oquantale(" + g.name() + "): invalid groupoid");
  }
  if (!rep.open) throw UsageError("oquantale(" + g.name() + "): groupoid is not open");

  const FinSpace& s1 = g.g1();
  const std::size_t k1 = s1.points();
  SpatialFrame arr = opens_of(s1);
  SpatialFrame base = opens_of(g.g0());
  const std::size_t n = arr.lat->size(), nb = base.lat->size();

  // pointwise product mask of two arrow sets
  auto mul_mask = [&](PtMask a, PtMask b) {
    PtMask out = 0;
    for (Pt x = 0; x < k1; ++x)
      for (Pt y = 0; y < k1; ++y)
        if (((a >> x) & 1u) && ((b >> y) & 1u) && g.composable(x, y))
          out |= PtMask(1) << g.m(x, y);
    return out;
  };
  std::vector<Elt> mult(n * n);
  for (Elt a = 0; a < n; ++a)
    for (Elt b = 0; b < n; ++b) {
      PtMask p = mul_mask(arr.mask[a], arr.mask[b]);
      if (!s1.is_open(p))
        throw StructuralError("oquantale(" + g.name() + "): product of opens " +
                              arr.lat->name(a) + " and " + arr.lat->name(b) + " is not open");
      mult[std::size_t(a) * n + b] = arr.by_mask(p);
    }
  std::vector<Elt> inv(n);
  for (Elt a = 0; a < n; ++a) {
    PtMask p = 0;
    for (Pt x = 0; x < k1; ++x)
      if ((arr.mask[a] >> x) & 1u) p |= PtMask(1) << g.inv(x);
    if (!s1.is_open(p))
      throw StructuralError("oquantale(" + g.name() + "): inverse image of open " +
                            arr.lat->name(a) + " is not open");
    inv[a] = arr.by_mask(p);
  }

  // the identity arrows form the unit exactly when they are an open set
  PtMask units = 0;
  for (Pt p = 0; p < g.units(); ++p) units |= PtMask(1) << g.unit(p);
  Elt unit = s1.is_open(units) ? arr.by_mask(units) : no_elt;

  Quantale q("O(" + g.name() + ")", arr.lat, std::move(mult), std::move(inv), unit);

  const std::vector<Pt>& along_l = g.r_table();
  const std::vector<Pt>& along_r = g.d_table();
  auto restrict_mask = [&](PtMask a, PtMask u_mask, const std::vector<Pt>& along) {
    PtMask out = 0;
    for (Pt x = 0; x < k1; ++x)
      if (((a >> x) & 1u) && ((u_mask >> along[x]) & 1u)) out |= PtMask(1) << x;
    return out;
  };
  std::vector<Elt> lres(nb * n), rres(n * nb);
  for (Elt u = 0; u < nb; ++u)
    for (Elt a = 0; a < n; ++a) {
      lres[std::size_t(u) * n + a] = arr.by_mask(restrict_mask(arr.mask[a], base.mask[u], along_l));
      rres[std::size_t(a) * nb + u] =
          arr.by_mask(restrict_mask(arr.mask[a], base.mask[u], along_r));
    }
  q.attach_base({base.lat, std::move(lres), std::move(rres)});

  std::vector<Elt> spp(n), ups(n);
  for (Elt a = 0; a < n; ++a) {
    PtMask s = 0;
    for (Pt x = 0; x < k1; ++x)
      if ((arr.mask[a] >> x) & 1u) s |= PtMask(1) << along_l[x];
    spp[a] = base.by_mask(s);  // open because d (hence r) is an open map
    PtMask v = 0;
    for (Pt p = 0; p < g.units(); ++p)
      if ((arr.mask[a] >> g.unit(p)) & 1u) v |= PtMask(1) << p;
    ups[a] = base.by_mask(v);
  }
  q.attach_support(std::move(spp));
  q.attach_upsilon(std::move(ups));
  return q;
}

FinGroupoid opposite_groupoid(const FinGroupoid& g) {
  const std::size_t k1 = g.arrows();
  std::vector<Pt> m(k1 * k1, no_pt);
  for (Pt a = 0; a < k1; ++a)
    for (Pt b = 0; b < k1; ++b)
      if (g.r(a) == g.d(b))  // composable in the opposite order
        m[std::size_t(a) * k1 + b] = g.m(b, a);
  return FinGroupoid(g.name() + ".op", g.g0(), g.g1(), g.r_table(), g.d_table(), std::move(m),
                     g.i_table(), g.u_table());
}

FinGroupoid pair_groupoid(std::size_t n, std::string name) {
  std::vector<std::string> unit_names, arrow_names;
  for (std::size_t p = 0; p < n; ++p) unit_names.push_back(std::to_string(p));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      arrow_names.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
  FinSpace g0(name + ".G0", unit_names, {});
  FinSpace g1(name + ".G1", arrow_names, {});
  const std::size_t k1 = n * n;  // arrow n*i + j runs from j to i
  std::vector<Pt> d(k1), r(k1), i_tab(k1), u(n), m(k1 * k1, no_pt);
  for (std::size_t a = 0; a < k1; ++a) {
    std::size_t hi = a / n, lo = a % n;
    d[a] = Pt(lo);
    r[a] = Pt(hi);
    i_tab[a] = Pt(lo * n + hi);
  }
  for (std::size_t p = 0; p < n; ++p) u[p] = Pt(p * n + p);
  for (std::size_t a = 0; a < k1; ++a)
    for (std::size_t b = 0; b < k1; ++b)
      if (d[a] == r[b]) m[a * k1 + b] = Pt((a / n) * n + (b % n));
  return FinGroupoid(std::move(name), std::move(g0), std::move(g1), std::move(d), std::move(r),
                     std::move(m), std::move(i_tab), std::move(u));
}

namespace {

FinGroupoid group_groupoid(std::size_t n, std::string name, bool indiscrete) {
  std::vector<std::string> arrow_names;
  for (std::size_t a = 0; a < n; ++a)
    arrow_names.push_back(a == 0 ? "e" : "g" + std::to_string(a));
  std::vector<std::pair<Pt, Pt>> order;
  if (indiscrete)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) order.push_back({Pt(a), Pt(b)});
  FinSpace g0(name + ".G0", {"*"}, {});
  FinSpace g1(name + ".G1", arrow_names, order);
  std::vector<Pt> d(n, 0), r(n, 0), i_tab(n), u = {0};
  std::vector<Pt> m(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    i_tab[a] = Pt((n - a) % n);
    for (std::size_t b = 0; b < n; ++b) m[a * n + b] = Pt((a + b) % n);
  }
  return FinGroupoid(std::move(name), std::move(g0), std::move(g1), std::move(d), std::move(r),
                     std::move(m), std::move(i_tab), std::move(u));
}

}  // namespace

FinGroupoid cyclic_group_groupoid(std::size_t n, std::string name) {
  return group_groupoid(n, std::move(name), false);
}

FinGroupoid indiscrete_group_groupoid(std::size_t n, std::string name) {
  return group_groupoid(n, std::move(name), true);
}

FinGroupoid unit_groupoid(FinSpace s, std::string name) {
  const std::size_t k = s.points();
  std::vector<std::string> arrow_names;
  std::vector<std::pair<Pt, Pt>> order;
  for (std::size_t p = 0; p < k; ++p) {
    arrow_names.push_back("id_" + s.point_name(Pt(p)));
    for (std::size_t q = 0; q < k; ++q)
      if (p != q && s.leq(Pt(p), Pt(q))) order.push_back({Pt(p), Pt(q)});
  }
  FinSpace g1(name + ".G1", arrow_names, order);
  std::vector<Pt> d(k), r(k), i_tab(k), u(k), m(k * k, no_pt);
  for (std::size_t p = 0; p < k; ++p) {
    d[p] = r[p] = Pt(p);
    i_tab[p] = u[p] = Pt(p);
    m[p * k + p] = Pt(p);
  }
  return FinGroupoid(std::move(name), std::move(s), std::move(g1), std::move(d), std::move(r),
                     std::move(m), std::move(i_tab), std::move(u));
}

}  // namespace qf
