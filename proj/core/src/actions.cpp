#include "qforge/actions.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qf {

namespace {

PtMask least_open(const FinSpace& s, PtMask pts) {
  PtMask out = 0;
  for (Pt p = 0; p < s.points(); ++p)
    if ((pts >> p) & 1u) out |= s.min_open(p);
  return out;
}

bool green(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) return false;
  return true;
}

// Verdict policy shared with the other derived-law suites: a law that
// follows from a passing definitional layer is an incident when it breaks,
// a plain failure otherwise.
CheckResult law(bool defn_ok, std::string name, std::string obj, const std::string& w) {
  if (w.empty()) return pass_result(std::move(name), std::move(obj));
  return defn_ok ? incident_result(std::move(name), std::move(obj), w)
                 : fail_result(std::move(name), std::move(obj), w);
}

std::string pair_name(const GAction& a, Pt ar, Pt v) {
  return "(" + a.g().g1().point_name(ar) + "," + a.x().point_name(v) + ")";
}

}  // namespace

GAction::GAction(std::string name, FinGroupoid g, FinSpace x, std::vector<Pt> p,
                 std::vector<Pt> act)
    : name_(std::move(name)), g_(std::move(g)), x_(std::move(x)), p_(std::move(p)),
      act_(std::move(act)) {
  const std::size_t k = x_.points();
  if (p_.size() != k) throw StructuralError("anchor table has the wrong size");
  for (Pt v = 0; v < k; ++v)
    if (p_[v] >= g_.units())
      throw StructuralError("anchor value out of range at " + x_.point_name(v));
  if (act_.size() != g_.arrows() * k) throw StructuralError("action table has the wrong size");
  for (Pt ar = 0; ar < g_.arrows(); ++ar)
    for (Pt v = 0; v < k; ++v) {
      Pt w = act_[std::size_t(ar) * k + v];
      std::string at = "(" + g_.g1().point_name(ar) + "," + x_.point_name(v) + ")";
      if (g_.d(ar) == p_[v]) {
        if (w >= k) throw StructuralError("action undefined on the composable pair " + at);
      } else if (w != no_pt) {
        throw StructuralError("action defined off the composable pairs at " + at);
      }
    }
}

Pt GAction::apply(Pt arrow, Pt v) const {
  if (arrow >= g_.arrows() || v >= x_.points() || !composable(arrow, v))
    throw UsageError("action undefined on " + pair_name(*this, arrow, v));
  return act_[std::size_t(arrow) * x_.points() + v];
}

std::vector<CheckResult> validate_action(const GAction& a) {
  const FinGroupoid& g = a.g();
  const FinSpace& x = a.x();
  const std::string obj = a.name();
  const std::size_t k = x.points(), na = g.arrows();
  std::vector<CheckResult> out;

  {
    std::string w;
    for (Pt v = 0; v < k && w.empty(); ++v)
      for (Pt u = 0; u < k && w.empty(); ++u)
        if (x.leq(v, u) && !g.g0().leq(a.p(v), a.p(u)))
          w = "anchor not monotone at " + x.point_name(v) + " <= " + x.point_name(u);
    out.push_back(w.empty() ? pass_result("action.anchor_continuous", obj)
                            : fail_result("action.anchor_continuous", obj, w));
  }
  {
    std::string w;
    for (Pt ar = 0; ar < na && w.empty(); ++ar)
      for (Pt v = 0; v < k && w.empty(); ++v) {
        if (!a.composable(ar, v)) continue;
        for (Pt ar2 = 0; ar2 < na && w.empty(); ++ar2)
          for (Pt v2 = 0; v2 < k && w.empty(); ++v2) {
            if (!a.composable(ar2, v2)) continue;
            if (!g.g1().leq(ar, ar2) || !x.leq(v, v2)) continue;
            if (!x.leq(a.apply(ar, v), a.apply(ar2, v2)))
              w = "action not monotone at " + pair_name(a, ar, v) + " <= " +
                  pair_name(a, ar2, v2);
          }
      }
    out.push_back(w.empty() ? pass_result("action.act_continuous", obj)
                            : fail_result("action.act_continuous", obj, w));
  }
  {
    std::string w;
    for (Pt ar = 0; ar < na && w.empty(); ++ar)
      for (Pt v = 0; v < k && w.empty(); ++v) {
        if (!a.composable(ar, v)) continue;
        if (a.p(a.apply(ar, v)) != g.r(ar))
          w = "the result of " + pair_name(a, ar, v) + " is not anchored at r(" +
              g.g1().point_name(ar) + ")";
      }
    out.push_back(w.empty() ? pass_result("action.pullback", obj)
                            : fail_result("action.pullback", obj, w));
  }
  if (na * na * k > (std::size_t(1) << 26)) {
    out.push_back(
        skipped_result("action.associativity", obj, "associativity scan exceeds the cell guard"));
  } else {
    std::string w;
    for (Pt gg = 0; gg < na && w.empty(); ++gg)
      for (Pt hh = 0; hh < na && w.empty(); ++hh) {
        if (!g.composable(gg, hh)) continue;
        for (Pt v = 0; v < k && w.empty(); ++v) {
          if (!a.composable(hh, v)) continue;
          Pt mid = a.apply(hh, v);
          if (!a.composable(gg, mid)) {
            w = "the composite over " + pair_name(a, hh, v) + " is undefined for " +
                g.g1().point_name(gg);
            break;
          }
          if (a.apply(g.m(gg, hh), v) != a.apply(gg, mid))
            w = "(" + g.g1().point_name(gg) + " " + g.g1().point_name(hh) + ")." +
                x.point_name(v) + " != " + g.g1().point_name(gg) + ".(" +
                g.g1().point_name(hh) + "." + x.point_name(v) + ")";
        }
      }
    out.push_back(w.empty() ? pass_result("action.associativity", obj)
                            : fail_result("action.associativity", obj, w));
  }
  {
    std::string w;
    for (Pt v = 0; v < k && w.empty(); ++v)
      if (a.apply(g.unit(a.p(v)), v) != v)
        w = "u(p(" + x.point_name(v) + ")) does not fix " + x.point_name(v);
    out.push_back(w.empty() ? pass_result("action.unitarity", obj)
                            : fail_result("action.unitarity", obj, w));
  }
  return out;
}

QModuleData module_of(const GAction& a) {
  GroupoidReport gr = validate_groupoid(a.g());
  if (!gr.open) throw UsageError("the open-set module needs an open groupoid");
  const bool defn_ok = green(validate_action(a));
  const FinSpace& x = a.x();
  const std::string obj = a.name();
  const std::size_t k = x.points();

  QModuleData m{obj, oquantale(a.g()), {}, {}, {}, {}, {}};
  SpatialFrame sf1 = opens_of(a.g().g1());
  SpatialFrame sf0 = opens_of(a.g().g0());
  SpatialFrame sfx = opens_of(x);
  m.xlat = sfx.lat;
  m.xmask = sfx.mask;
  const std::size_t nq = m.q.size(), nx = m.xlat->size(), nb = m.q.base().size();
  if (sf1.lat->size() != nq || sf0.lat->size() != nb)
    throw StructuralError("quantale carriers out of step with the open-set frames");

  std::string img_w;
  m.act.assign(nq * nx, 0);
  for (Elt A = 0; A < Elt(nq); ++A) {
    PtMask am = sf1.mask[A];
    for (Elt V = 0; V < Elt(nx); ++V) {
      PtMask vm = sfx.mask[V];
      PtMask img = 0;
      for (Pt ar = 0; ar < a.g().arrows(); ++ar) {
        if (!((am >> ar) & 1u)) continue;
        for (Pt v = 0; v < k; ++v)
          if (((vm >> v) & 1u) && a.composable(ar, v)) img |= PtMask(1) << a.apply(ar, v);
      }
      PtMask up = least_open(x, img);
      if (img != up && img_w.empty())
        img_w = "the image of " + m.q.lat().name(A) + " on " + m.xlat->name(V) + " is not open";
      m.act[std::size_t(A) * nx + V] = sfx.by_mask(up);
    }
  }
  m.bres.assign(nb * nx, 0);
  for (Elt b = 0; b < Elt(nb); ++b) {
    PtMask bm = sf0.mask[b];
    PtMask pre = 0;
    for (Pt v = 0; v < k; ++v)
      if ((bm >> a.p(v)) & 1u) pre |= PtMask(1) << v;
    for (Elt V = 0; V < Elt(nx); ++V)
      m.bres[std::size_t(b) * nx + V] = sfx.by_mask(pre & sfx.mask[V]);
  }

  m.checks.push_back(law(defn_ok, "module.image_open", obj, img_w));
  {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A) {
      if (m.mul(A, m.xlat->bottom()) != m.xlat->bottom())
        w = m.q.lat().name(A) + ".bottom != bottom";
      for (Elt B = A; B < Elt(nq) && w.empty(); ++B)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.lat().join(A, B), V) != m.xlat->join(m.mul(A, V), m.mul(B, V)))
            w = "join not preserved in the quantale slot at (" + m.q.lat().name(A) + "," +
                m.q.lat().name(B) + ")." + m.xlat->name(V);
    }
    if (w.empty() && m.mul(m.q.lat().bottom(), m.xlat->top()) != m.xlat->bottom())
      w = "bottom.top != bottom";
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
        for (Elt W = V; W < Elt(nx) && w.empty(); ++W)
          if (m.mul(A, m.xlat->join(V, W)) != m.xlat->join(m.mul(A, V), m.mul(A, W)))
            w = "join not preserved in the carrier slot at " + m.q.lat().name(A) + ".(" +
                m.xlat->name(V) + "," + m.xlat->name(W) + ")";
    m.checks.push_back(w.empty() ? pass_result("module.action_joins", obj)
                                 : fail_result("module.action_joins", obj, w));
  }
  if (nq * nq * nx > (std::size_t(1) << 26)) {
    m.checks.push_back(
        skipped_result("module.associative", obj, "associativity scan exceeds the cell guard"));
  } else {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt B = 0; B < Elt(nq) && w.empty(); ++B)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.mul(A, B), V) != m.mul(A, m.mul(B, V)))
            w = "(" + m.q.lat().name(A) + " " + m.q.lat().name(B) + ")." + m.xlat->name(V) +
                " != nested";
    m.checks.push_back(w.empty() ? pass_result("module.associative", obj)
                                 : fail_result("module.associative", obj, w));
  }
  if (!m.q.unital()) {
    m.checks.push_back(
        skipped_result("module.unital", obj, "the quantale has no designated unit"));
  } else {
    std::string w;
    for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
      if (m.mul(m.q.unit(), V) != V) w = "e." + m.xlat->name(V) + " != " + m.xlat->name(V);
    m.checks.push_back(w.empty() ? pass_result("module.unital", obj)
                                 : fail_result("module.unital", obj, w));
  }
  {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt b = 0; b < Elt(nb) && w.empty(); ++b)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.rres(A, b), V) != m.mul(A, m.res(b, V)))
            w = "(" + m.q.lat().name(A) + " |> " + m.q.base().name(b) + ")." + m.xlat->name(V) +
                " != " + m.q.lat().name(A) + ".(" + m.q.base().name(b) + "." + m.xlat->name(V) +
                ")";
    m.checks.push_back(w.empty() ? pass_result("module.balanced", obj)
                                 : fail_result("module.balanced", obj, w));
  }
  {
    const SupLattice& B = m.q.base();
    std::string w;
    for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
      if (m.res(B.top(), V) != V) w = "top." + m.xlat->name(V) + " != " + m.xlat->name(V);
    for (Elt b = 0; b < Elt(nb) && w.empty(); ++b)
      for (Elt c = b; c < Elt(nb) && w.empty(); ++c)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V) {
          if (m.res(b, m.res(c, V)) != m.res(B.meet(b, c), V))
            w = "iterated restriction differs from the meet at (" + B.name(b) + "," + B.name(c) +
                ")." + m.xlat->name(V);
          else if (m.res(B.join(b, c), V) != m.xlat->join(m.res(b, V), m.res(c, V)))
            w = "restriction join split fails at (" + B.name(b) + "," + B.name(c) + ")." +
                m.xlat->name(V);
        }
    for (Elt b = 0; b < Elt(nb) && w.empty(); ++b)
      for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
        for (Elt W = V; W < Elt(nx) && w.empty(); ++W)
          if (m.res(b, m.xlat->join(V, W)) != m.xlat->join(m.res(b, V), m.res(b, W)))
            w = "restriction not join-preserving at " + B.name(b) + ".(" + m.xlat->name(V) + "," +
                m.xlat->name(W) + ")";
    m.checks.push_back(w.empty() ? pass_result("module.base_action", obj)
                                 : fail_result("module.base_action", obj, w));
  }
  return m;
}

QModuleData module_from_tables(std::string object, Quantale q, LatPtr xlat,
                               std::vector<Elt> act) {
  if (!q.has_base()) throw UsageError("a table-only module needs a based quantale");
  if (!q.unital())
    throw UsageError("a table-only module needs a designated unit for the base action");
  const std::size_t nq = q.size(), nx = xlat->size(), nb = q.base().size();
  if (act.size() != nq * nx) throw StructuralError("module action table has the wrong size");
  for (Elt e : act)
    if (e >= nx) throw StructuralError("module action value out of range");

  QModuleData m{std::move(object), std::move(q), std::move(xlat), {}, std::move(act), {}, {}};
  Spectrum sp = spectrum(m.xlat, m.object + ".pts");
  m.xmask = sp.elt_to_mask;
  m.bres.assign(nb * nx, 0);
  for (Elt b = 0; b < Elt(nb); ++b) {
    Elt ib = m.q.lres(b, m.q.unit());
    for (Elt V = 0; V < Elt(nx); ++V) m.bres[std::size_t(b) * nx + V] = m.mul(ib, V);
  }

  const std::string obj = m.object;
  m.checks.push_back(
      skipped_result("module.image_open", obj, "the module was given by tables; no point action"));
  {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A) {
      if (m.mul(A, m.xlat->bottom()) != m.xlat->bottom())
        w = m.q.lat().name(A) + ".bottom != bottom";
      for (Elt B = A; B < Elt(nq) && w.empty(); ++B)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.lat().join(A, B), V) != m.xlat->join(m.mul(A, V), m.mul(B, V)))
            w = "join not preserved in the quantale slot at (" + m.q.lat().name(A) + "," +
                m.q.lat().name(B) + ")." + m.xlat->name(V);
    }
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
        for (Elt W = V; W < Elt(nx) && w.empty(); ++W)
          if (m.mul(A, m.xlat->join(V, W)) != m.xlat->join(m.mul(A, V), m.mul(A, W)))
            w = "join not preserved in the carrier slot at " + m.q.lat().name(A) + ".(" +
                m.xlat->name(V) + "," + m.xlat->name(W) + ")";
    m.checks.push_back(w.empty() ? pass_result("module.action_joins", obj)
                                 : fail_result("module.action_joins", obj, w));
  }
  if (nq * nq * nx > (std::size_t(1) << 26)) {
    m.checks.push_back(
        skipped_result("module.associative", obj, "associativity scan exceeds the cell guard"));
  } else {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt B = 0; B < Elt(nq) && w.empty(); ++B)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.mul(A, B), V) != m.mul(A, m.mul(B, V)))
            w = "(" + m.q.lat().name(A) + " " + m.q.lat().name(B) + ")." + m.xlat->name(V) +
                " != nested";
    m.checks.push_back(w.empty() ? pass_result("module.associative", obj)
                                 : fail_result("module.associative", obj, w));
  }
  {
    std::string w;
    for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
      if (m.mul(m.q.unit(), V) != V) w = "e." + m.xlat->name(V) + " != " + m.xlat->name(V);
    m.checks.push_back(w.empty() ? pass_result("module.unital", obj)
                                 : fail_result("module.unital", obj, w));
  }
  {
    std::string w;
    for (Elt A = 0; A < Elt(nq) && w.empty(); ++A)
      for (Elt b = 0; b < Elt(nb) && w.empty(); ++b)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.mul(m.q.rres(A, b), V) != m.mul(A, m.res(b, V)))
            w = "(" + m.q.lat().name(A) + " |> " + m.q.base().name(b) + ")." + m.xlat->name(V) +
                " != " + m.q.lat().name(A) + ".(" + m.q.base().name(b) + "." + m.xlat->name(V) +
                ")";
    m.checks.push_back(w.empty() ? pass_result("module.balanced", obj)
                                 : fail_result("module.balanced", obj, w));
  }
  {
    const SupLattice& B = m.q.base();
    std::string w;
    for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
      if (m.res(B.top(), V) != V) w = "top." + m.xlat->name(V) + " != " + m.xlat->name(V);
    for (Elt b = 0; b < Elt(nb) && w.empty(); ++b)
      for (Elt c = b; c < Elt(nb) && w.empty(); ++c)
        for (Elt V = 0; V < Elt(nx) && w.empty(); ++V)
          if (m.res(b, m.res(c, V)) != m.res(B.meet(b, c), V))
            w = "iterated restriction differs from the meet at (" + B.name(b) + "," + B.name(c) +
                ")." + m.xlat->name(V);
    m.checks.push_back(w.empty() ? pass_result("module.base_action", obj)
                                 : fail_result("module.base_action", obj, w));
  }
  return m;
}

InverseImageResult act_inverse_image(const QModuleData& m, const GAction* a) {
  const std::string obj = m.object;
  const std::size_t nq = m.q.size(), nx = m.xlat->size();
  const bool defn_ok = green(m.checks);

  TensorBase tb;
  tb.base = m.q.base_ptr();
  tb.ract = m.q.based().rres;
  tb.lact = m.bres;
  TensorCtx ctx = TensorContext::over_base(m.q.lat_ptr(), m.xlat, tb);
  InverseImageResult out{enumerate_tensor(ctx), {}, {}};
  const TensorLattice& t = out.tensor;
  const std::size_t nt = t.lat->size();

  std::string lands_w;
  out.alpha.assign(nx, 0);
  for (Elt xv = 0; xv < Elt(nx); ++xv) {
    std::vector<Elt> row(nq, 0);
    for (Elt A = 0; A < Elt(nq); ++A) {
      std::vector<Elt> ys;
      for (Elt V = 0; V < Elt(nx); ++V)
        if (m.xlat->leq(m.mul(A, V), xv)) ys.push_back(V);
      row[A] = m.xlat->join_of(ys);
    }
    BiIdeal bi(ctx, row);
    if (bi.rows() != row && lands_w.empty())
      lands_w = "the adjoint row at " + m.xlat->name(xv) + " is not closed";
    out.alpha[xv] = t.id_of(bi);
  }
  out.checks.push_back(law(defn_ok, "actmod.adjoint_lands", obj, lands_w));

  {
    std::vector<Elt> applied(nt, 0);
    for (Elt dd = 0; dd < Elt(nt); ++dd) {
      Elt ap = m.xlat->bottom();
      for (Elt A = 0; A < Elt(nq); ++A)
        ap = m.xlat->join(ap, m.mul(A, t.elts[dd].row(A)));
      applied[dd] = ap;
    }
    std::string w;
    for (Elt xv = 0; xv < Elt(nx) && w.empty(); ++xv)
      for (Elt dd = 0; dd < Elt(nt) && w.empty(); ++dd)
        if (m.xlat->leq(applied[dd], xv) != t.lat->leq(dd, out.alpha[xv]))
          w = "adjunction fails between " + t.elts[dd].describe() + " and " + m.xlat->name(xv);
    out.checks.push_back(law(defn_ok, "actmod.adjunction", obj, w));
  }

  if (m.q.unital()) {
    PartialUnitsResult pu = partial_units(m.q);
    std::string w;
    for (Elt xv = 0; xv < Elt(nx) && w.empty(); ++xv) {
      std::vector<std::pair<Elt, Elt>> prs;
      prs.reserve(pu.elements.size());
      for (Elt s : pu.elements) prs.emplace_back(s, m.mul(m.q.star(s), xv));
      BiIdeal f = BiIdeal::from_pairs(ctx, prs);
      if (t.id_of(f) != out.alpha[xv])
        w = "the partial-unit formula diverges from the adjoint at " + m.xlat->name(xv);
    }
    out.checks.push_back(law(defn_ok, "actmod.etale_formula", obj, w));

    std::string jw;
    if (out.alpha[m.xlat->bottom()] != t.lat->bottom()) jw = "the adjoint of bottom is not bottom";
    for (Elt xv = 0; xv < Elt(nx) && jw.empty(); ++xv)
      for (Elt yv = xv; yv < Elt(nx) && jw.empty(); ++yv)
        if (out.alpha[m.xlat->join(xv, yv)] != t.lat->join(out.alpha[xv], out.alpha[yv]))
          jw = "the adjoint does not preserve the join of " + m.xlat->name(xv) + " and " +
               m.xlat->name(yv);
    out.checks.push_back(law(defn_ok, "actmod.etale_joins", obj, jw));
  } else {
    const std::string why = "the quantale has no designated unit; the partial-unit route needs one";
    out.checks.push_back(skipped_result("actmod.etale_formula", obj, why));
    out.checks.push_back(skipped_result("actmod.etale_joins", obj, why));
  }

  if (a == nullptr) {
    out.checks.push_back(
        skipped_result("actmod.tensor_spatial", obj, "no spatial action supplied"));
  } else {
    try {
      CMap dmap(&a->g().g1(), &a->g().g0(), a->g().d_table());
      CMap pmap(&a->x(), &a->g().g0(), a->p_table());
      PullbackSpace pb = pullback(dmap, pmap, obj + ".pairs");
      SpatialFrame sfp = opens_of(pb.space);
      SpatialFrame sf1 = opens_of(a->g().g1());
      std::string w;
      std::vector<PtMask> wmask(nt, 0);
      std::map<PtMask, Elt> seen;
      for (Elt dd = 0; dd < Elt(nt) && w.empty(); ++dd) {
        PtMask wm = 0;
        for (Elt A = 0; A < Elt(nq); ++A) {
          PtMask am = sf1.mask[A], vm = m.xmask[t.elts[dd].row(A)];
          for (Pt pp = 0; pp < pb.space.points(); ++pp) {
            auto [ar, v] = pb.pairs[pp];
            if (((am >> ar) & 1u) && ((vm >> v) & 1u)) wm |= PtMask(1) << pp;
          }
        }
        if (!pb.space.is_open(wm)) {
          w = "tensor element " + t.elts[dd].describe() +
              " maps to a non-open set of composable pairs";
        } else if (auto it = seen.find(wm); it != seen.end()) {
          w = "tensor elements " + t.elts[it->second].describe() + " and " +
              t.elts[dd].describe() + " share the composable-pairs open";
        } else {
          seen[wm] = dd;
          wmask[dd] = wm;
        }
      }
      if (w.empty() && seen.size() != sfp.lat->size())
        w = "the tensor has " + std::to_string(nt) + " elements but the composable-pairs space " +
            std::to_string(sfp.lat->size()) + " opens";
      for (Elt dd = 0; dd < Elt(nt) && w.empty(); ++dd)
        for (Elt ee = 0; ee < Elt(nt) && w.empty(); ++ee)
          if (t.lat->leq(dd, ee) != ((wmask[dd] & ~wmask[ee]) == 0))
            w = "the tensor order disagrees with inclusion at " + t.elts[dd].describe() + " and " +
                t.elts[ee].describe();
      out.checks.push_back(law(defn_ok, "actmod.tensor_spatial", obj, w));
    } catch (const CapacityError& e) {
      out.checks.push_back(skipped_result("actmod.tensor_spatial", obj, e.what()));
    } catch (const StructuralError& e) {
      out.checks.push_back(skipped_result(
          "actmod.tensor_spatial", obj,
          std::string("the spatial route needs continuous structure maps: ") + e.what()));
    }
  }
  return out;
}

GAction lift_action(const GAction& a, const CoverData& cd) {
  const std::size_t k = a.x().points();
  const std::size_t uh = cd.ghat.units();
  if (uh != a.g().units() || cd.j0.size() != uh)
    throw UsageError("the unit map is not a bijection onto the base units");
  std::vector<Pt> inv0(a.g().units(), no_pt);
  for (Pt p = 0; p < uh; ++p) {
    if (cd.j0[p] >= a.g().units() || inv0[cd.j0[p]] != no_pt)
      throw UsageError("the unit map is not a bijection onto the base units");
    inv0[cd.j0[p]] = p;
  }
  std::vector<Pt> ph(k);
  for (Pt v = 0; v < k; ++v) ph[v] = inv0[a.p(v)];
  std::vector<Pt> ah(cd.ghat.arrows() * k, no_pt);
  for (Pt ar = 0; ar < cd.ghat.arrows(); ++ar)
    for (Pt v = 0; v < k; ++v) {
      if (cd.ghat.d(ar) != ph[v]) continue;
      Pt base = cd.j1[ar];
      if (base >= a.g().arrows() || !a.composable(base, v))
        throw StructuralError("the covering functor does not respect sources at " +
                              cd.ghat.g1().point_name(ar));
      ah[std::size_t(ar) * k + v] = a.apply(base, v);
    }
  return GAction("lift(" + a.name() + ")", cd.ghat, a.x(), std::move(ph), std::move(ah));
}

DescentResult check_descent(const GAction& xhat, const CoverAssembly& ca) {
  const FinGroupoid& gh = xhat.g();
  if (gh.units() != ca.ghat.units() || gh.arrows() != ca.ghat.arrows() ||
      gh.d_table() != ca.ghat.d_table() || gh.r_table() != ca.ghat.r_table() ||
      gh.m_table() != ca.ghat.m_table() || gh.i_table() != ca.ghat.i_table() ||
      gh.u_table() != ca.ghat.u_table())
    throw UsageError("the action is not over the covering groupoid");

  const std::string obj = xhat.name();
  const bool defn_ok = green(validate_action(xhat));
  const FinSpace& x = xhat.x();
  const FinGroupoid& base = ca.base;
  const std::size_t k = x.points(), nb = base.arrows();

  std::vector<Pt> pb(k);
  for (Pt v = 0; v < k; ++v) pb[v] = ca.j0[xhat.p(v)];

  DescentResult out;
  std::vector<Pt> beta(nb * k, no_pt);
  std::string w;
  for (Pt g = 0; g < nb && w.empty(); ++g)
    for (Pt v = 0; v < k && w.empty(); ++v) {
      if (base.d(g) != pb[v]) continue;
      Pt val = no_pt, first = no_pt;
      for (Pt ar = 0; ar < gh.arrows(); ++ar) {
        if (ca.j1[ar] != g || gh.d(ar) != xhat.p(v)) continue;
        Pt y = xhat.apply(ar, v);
        if (val == no_pt) {
          val = y;
          first = ar;
        } else if (y != val) {
          w = "arrows " + gh.g1().point_name(first) + " and " + gh.g1().point_name(ar) +
              " over " + base.g1().point_name(g) + " send " + x.point_name(v) + " to " +
              x.point_name(val) + " and " + x.point_name(y);
          break;
        }
      }
      if (!w.empty()) break;
      if (val == no_pt)
        throw UsageError("the covering map does not reach the composable pair (" +
                         base.g1().point_name(g) + "," + x.point_name(v) + ")");
      beta[std::size_t(g) * k + v] = val;
    }
  for (Pt g = 0; g < nb && w.empty(); ++g)
    for (Pt v = 0; v < k && w.empty(); ++v) {
      if (base.d(g) != pb[v]) continue;
      for (Pt g2 = 0; g2 < nb && w.empty(); ++g2)
        for (Pt v2 = 0; v2 < k && w.empty(); ++v2) {
          if (base.d(g2) != pb[v2]) continue;
          if (!base.g1().leq(g, g2) || !x.leq(v, v2)) continue;
          Pt y = beta[std::size_t(g) * k + v], y2 = beta[std::size_t(g2) * k + v2];
          if (!x.leq(y, y2))
            w = "beta is not continuous at (" + base.g1().point_name(g) + "," + x.point_name(v) +
                ") <= (" + base.g1().point_name(g2) + "," + x.point_name(v2) + "): the open " +
                x.mask_name(x.min_open(y)) + " pulls back to a non-open set";
        }
    }
  if (!w.empty()) {
    out.verdict = fail_result("actions.descent", obj, w);
    out.checks.push_back(
        skipped_result("actions.descended_valid", obj, "no descended action to validate"));
    out.checks.push_back(
        skipped_result("actions.lift_roundtrip", obj, "no descended action to lift"));
    return out;
  }
  out.verdict = pass_result("actions.descent", obj);
  out.descended.emplace("descend(" + obj + ")", base, x, pb, beta);
  {
    std::string vw;
    for (const auto& r : validate_action(*out.descended))
      if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) {
        vw = r.name + ": " + r.witness;
        break;
      }
    out.checks.push_back(law(defn_ok, "actions.descended_valid", obj, vw));
  }
  {
    CoverData cd{ca.ghat, ca.j0, ca.j1};
    GAction relift = lift_action(*out.descended, cd);
    std::string rw;
    if (relift.p_table() != xhat.p_table())
      rw = "the relifted anchor differs";
    else if (relift.act_table() != xhat.act_table())
      rw = "the relifted action differs";
    out.checks.push_back(law(defn_ok, "actions.lift_roundtrip", obj, rw));
  }
  return out;
}

OLocaleResult check_O_locale(const QModuleData& m, const IEQFData& ieq) {
  const Quantale& Q = ieq.oghat;
  if (m.q.size() != Q.size() || !m.q.lat().same_order_as(Q.lat()))
    throw UsageError("the module is not over the covering quantale");
  for (Elt s = 0; s < Elt(Q.size()); ++s) {
    if (m.q.star(s) != Q.star(s))
      throw UsageError("the module is not over the covering quantale");
    for (Elt t2 = 0; t2 < Elt(Q.size()); ++t2)
      if (m.q.mul(s, t2) != Q.mul(s, t2))
        throw UsageError("the module is not over the covering quantale");
  }

  const std::string obj = m.object;
  const std::size_t nx = m.xlat->size(), no = ieq.og.size();
  const bool defn_ok = green(m.checks);

  OLocaleResult out;
  CheckResult cf = validate_frame(*m.xlat, obj);
  out.checks.push_back(CheckResult{"olocale.carrier_frame", obj, cf.verdict, cf.witness});

  InverseImageResult inv = act_inverse_image(m);
  const TensorLattice& tq = inv.tensor;
  for (auto& r : inv.checks) out.checks.push_back(std::move(r));

  std::string aw;
  if (inv.alpha[m.xlat->bottom()] != tq.lat->bottom()) aw = "alpha_*(bottom) != bottom";
  if (aw.empty() && inv.alpha[m.xlat->top()] != tq.lat->top()) aw = "alpha_*(top) != top";
  for (Elt xv = 0; xv < Elt(nx) && aw.empty(); ++xv)
    for (Elt yv = xv; yv < Elt(nx) && aw.empty(); ++yv) {
      if (inv.alpha[m.xlat->join(xv, yv)] != tq.lat->join(inv.alpha[xv], inv.alpha[yv]))
        aw = "alpha_* does not preserve the join of " + m.xlat->name(xv) + " and " +
             m.xlat->name(yv);
      else if (inv.alpha[m.xlat->meet(xv, yv)] != tq.lat->meet(inv.alpha[xv], inv.alpha[yv]))
        aw = "alpha_* does not preserve the meet of " + m.xlat->name(xv) + " and " +
             m.xlat->name(yv);
    }
  out.checks.push_back(aw.empty() ? pass_result("olocale.alpha_frame", obj)
                                  : fail_result("olocale.alpha_frame", obj, aw));

  TensorBase tb;
  tb.base = m.q.base_ptr();
  tb.ract = ieq.og.based().rres;
  tb.lact = m.bres;
  TensorCtx cox = TensorContext::over_base(ieq.og.lat_ptr(), m.xlat, tb);
  TensorLattice tox = enumerate_tensor(cox);
  SupMap jx = map_tensor(tox, tq, ieq.j, SupMap::identity(m.xlat));
  const std::size_t nox = tox.lat->size();

  {
    bool j_mono = true;
    for (Elt p = 0; p < Elt(no) && j_mono; ++p)
      for (Elt q2 = p + 1; q2 < Elt(no) && j_mono; ++q2)
        if (ieq.j(p) == ieq.j(q2)) j_mono = false;
    std::string w;
    for (Elt p = 0; p < Elt(nox) && w.empty(); ++p)
      for (Elt q2 = p + 1; q2 < Elt(nox) && w.empty(); ++q2)
        if (jx(p) == jx(q2))
          w = "j (x) id identifies " + tox.elts[p].describe() + " and " + tox.elts[q2].describe();
    out.checks.push_back(law(defn_ok && j_mono, "olocale.jx_mono", obj, w));
  }

  out.beta_star.assign(nx, no_elt);
  std::vector<Elt> by_image(tq.lat->size(), no_elt);
  for (Elt o = 0; o < Elt(nox); ++o)
    if (by_image[jx(o)] == no_elt) by_image[jx(o)] = o;
  std::string mw;
  for (Elt xv = 0; xv < Elt(nx); ++xv) {
    Elt pre = by_image[inv.alpha[xv]];
    out.beta_star[xv] = pre;
    if (pre == no_elt && mw.empty())
      mw = "alpha_*(" + m.xlat->name(xv) + ") = " + tq.elts[inv.alpha[xv]].describe() +
           " lies outside the embedded tensor";
  }

  CheckResult bf = pass_result("olocale.beta_frame", obj);
  if (!mw.empty()) {
    bf = skipped_result("olocale.beta_frame", obj, "the factorization is partial");
  } else {
    std::string w;
    if (out.beta_star[m.xlat->bottom()] != tox.lat->bottom()) w = "beta_*(bottom) != bottom";
    if (w.empty() && out.beta_star[m.xlat->top()] != tox.lat->top()) w = "beta_*(top) != top";
    for (Elt xv = 0; xv < Elt(nx) && w.empty(); ++xv)
      for (Elt yv = xv; yv < Elt(nx) && w.empty(); ++yv) {
        if (out.beta_star[m.xlat->join(xv, yv)] !=
            tox.lat->join(out.beta_star[xv], out.beta_star[yv]))
          w = "beta_* does not preserve the join of " + m.xlat->name(xv) + " and " +
              m.xlat->name(yv);
        else if (out.beta_star[m.xlat->meet(xv, yv)] !=
                 tox.lat->meet(out.beta_star[xv], out.beta_star[yv]))
          w = "beta_* does not preserve the meet of " + m.xlat->name(xv) + " and " +
              m.xlat->name(yv);
      }
    if (!w.empty()) bf = fail_result("olocale.beta_frame", obj, w);
  }
  out.checks.push_back(bf);

  std::string vw;
  if (cf.verdict == Verdict::fail) vw = "olocale.carrier_frame: " + cf.witness;
  if (vw.empty() && !aw.empty()) vw = "olocale.alpha_frame: " + aw;
  if (vw.empty() && !mw.empty()) vw = mw;
  if (vw.empty() && bf.verdict == Verdict::fail) vw = "olocale.beta_frame: " + bf.witness;
  out.verdict = vw.empty() ? pass_result("actions.o_locale", obj)
                           : fail_result("actions.o_locale", obj, vw);
  return out;
}

std::vector<CheckResult> check_descent_vs_o_locale(const GAction& xhat, const CoverAssembly& ca,
                                                   const IEQFData& ieq) {
  DescentResult dr = check_descent(xhat, ca);
  QModuleData m = module_of(xhat);
  OLocaleResult ol = check_O_locale(m, ieq);
  const std::string obj = xhat.name();
  const bool defn_ok = green(validate_action(xhat)) && green(m.checks);

  std::vector<CheckResult> out;
  out.push_back(dr.verdict);
  for (auto& r : dr.checks) out.push_back(std::move(r));
  out.push_back(ol.verdict);
  for (auto& r : ol.checks) out.push_back(std::move(r));

  {
    bool pa = dr.verdict.ok(), pb = ol.verdict.ok();
    std::string w;
    if (pa != pb)
      w = std::string("descent says ") + (pa ? "yes" : "no") + ", the factorization says " +
          (pb ? "yes" : "no");
    out.push_back(law(defn_ok, "actions.descent_iff_o_locale", obj, w));
  }
  if (!dr.descended) {
    out.push_back(skipped_result("actions.j_dominated", obj,
                                 "the action does not descend; the comparison needs the "
                                 "descended module"));
  } else {
    QModuleData mb = module_of(*dr.descended);
    if (!mb.q.lat().same_order_as(ieq.og.lat()))
      throw StructuralError("the descended module is out of step with the embedded quantale");
    std::string w;
    for (Elt aa = 0; aa < Elt(ieq.og.size()) && w.empty(); ++aa)
      for (Elt xv = 0; xv < Elt(m.xlat->size()) && w.empty(); ++xv)
        if (!m.xlat->leq(m.mul(ieq.j(aa), xv), mb.mul(aa, xv)))
          w = "j(" + ieq.og.lat().name(aa) + ")." + m.xlat->name(xv) +
              " exceeds the descended action";
    out.push_back(law(defn_ok && green(mb.checks), "actions.j_dominated", obj, w));
  }
  return out;
}

OrbitResult invariants_and_orbit(const GAction& a, const CoverData& cd) {
  QModuleData mb = module_of(a);
  GAction lifted = lift_action(a, cd);
  QModuleData mh = module_of(lifted);
  const std::string obj = a.name();
  const bool defn_ok =
      green(validate_action(a)) && green(mb.checks) && green(mh.checks);
  const SupLattice& L = *mb.xlat;
  const std::size_t nx = L.size();

  OrbitResult out;
  std::string dw;
  auto inv_set = [&](const QModuleData& mm) {
    std::vector<char> inv(nx, 0);
    for (Elt xv = 0; xv < Elt(nx); ++xv) {
      bool c1 = true;
      for (Elt A = 0; A < Elt(mm.q.size()) && c1; ++A)
        if (!L.leq(mm.mul(A, xv), xv)) c1 = false;
      Elt tx = mm.mul(mm.q.lat().top(), xv);
      bool c2 = L.leq(tx, xv);
      bool c3 = tx == xv;
      if ((c1 != c2 || c2 != c3) && dw.empty())
        dw = "the invariance conditions split at " + L.name(xv) + " over " + mm.q.name();
      inv[xv] = c3 ? 1 : 0;
    }
    return inv;
  };
  std::vector<char> io = inv_set(mb);
  std::vector<char> iq = inv_set(mh);
  out.checks.push_back(law(defn_ok, "orbit.definitions_agree", obj, dw));
  {
    std::string w;
    for (Elt xv = 0; xv < Elt(nx) && w.empty(); ++xv)
      if (io[xv] && !iq[xv])
        w = L.name(xv) + " is invariant over the base but not over the cover";
    out.checks.push_back(law(defn_ok, "orbit.io_subset_iq", obj, w));
  }
  {
    std::string w;
    for (Elt xv = 0; xv < Elt(nx) && w.empty(); ++xv)
      if (io[xv] != iq[xv])
        w = L.name(xv) + (io[xv] ? " is invariant only over the base"
                                 : " is invariant only over the cover");
    out.checks.push_back(law(defn_ok, "orbit.io_equals_iq", obj, w));
  }
  for (Elt xv = 0; xv < Elt(nx); ++xv)
    if (io[xv]) out.invariant.push_back(xv);
  {
    std::string w;
    if (!io[L.bottom()]) w = "bottom is not invariant";
    if (w.empty() && !io[L.top()]) w = "top is not invariant";
    for (std::size_t i = 0; i < out.invariant.size() && w.empty(); ++i)
      for (std::size_t j2 = i; j2 < out.invariant.size() && w.empty(); ++j2) {
        Elt p = out.invariant[i], q2 = out.invariant[j2];
        if (!io[L.join(p, q2)])
          w = "the join of " + L.name(p) + " and " + L.name(q2) + " is not invariant";
        else if (!io[L.meet(p, q2)])
          w = "the meet of " + L.name(p) + " and " + L.name(q2) + " is not invariant";
      }
    out.checks.push_back(law(defn_ok, "orbit.sublattice", obj, w));
  }
  {
    // Spatial oracle: orbit classes of points, then the saturated opens.
    const FinSpace& x = a.x();
    const std::size_t k = x.points();
    std::vector<Pt> root(k);
    for (Pt v = 0; v < k; ++v) root[v] = v;
    auto find = [&](Pt v) {
      while (root[v] != v) v = root[v] = root[root[v]];
      return v;
    };
    for (Pt ar = 0; ar < a.g().arrows(); ++ar)
      for (Pt v = 0; v < k; ++v)
        if (a.composable(ar, v)) {
          Pt rv = find(v), rw = find(a.apply(ar, v));
          if (rv != rw) root[rv] = rw;
        }
    std::vector<PtMask> cls(k, 0);
    for (Pt v = 0; v < k; ++v) cls[find(v)] |= PtMask(1) << v;
    std::string w;
    for (Elt e = 0; e < Elt(nx) && w.empty(); ++e) {
      PtMask mk = mb.xmask[e];
      bool saturated = true;
      for (Pt v = 0; v < k && saturated; ++v)
        if (((mk >> v) & 1u) && (cls[find(v)] & ~mk)) saturated = false;
      if (saturated != bool(io[e]))
        w = "open " + x.mask_name(mk) +
            (saturated ? " is saturated but not invariant" : " is invariant but not saturated");
    }
    out.checks.push_back(law(defn_ok, "orbit.spatial_coequalizer", obj, w));
  }
  {
    std::vector<std::string> names;
    std::vector<std::pair<Elt, Elt>> pairs;
    for (Elt id : out.invariant) names.push_back(L.name(id));
    for (std::size_t i = 0; i < out.invariant.size(); ++i)
      for (std::size_t j2 = 0; j2 < out.invariant.size(); ++j2)
        if (L.leq(out.invariant[i], out.invariant[j2]))
          pairs.emplace_back(Elt(i), Elt(j2));
    out.orbit = make_lattice(std::move(names), pairs);
  }
  return out;
}

std::vector<CheckResult> check_equivariant(const std::vector<Pt>& f, const GAction& a,
                                           const GAction& b, const CoverData& cd) {
  const FinGroupoid& g = a.g();
  if (g.units() != b.g().units() || g.arrows() != b.g().arrows() ||
      g.d_table() != b.g().d_table() || g.r_table() != b.g().r_table() ||
      g.m_table() != b.g().m_table() || g.i_table() != b.g().i_table() ||
      g.u_table() != b.g().u_table())
    throw UsageError("equivariance needs two actions of one groupoid");
  const FinSpace& xa = a.x();
  const FinSpace& xb = b.x();
  const std::size_t ka = xa.points(), kb = xb.points();
  if (f.size() != ka) throw StructuralError("map table has the wrong size");
  for (Pt v : f)
    if (v >= kb) throw StructuralError("map value out of range");
  CMap fm(&xa, &xb, f);
  (void)fm;
  const std::string obj = a.name() + " -> " + b.name();
  const bool defn_ok = green(validate_action(a)) && green(validate_action(b));

  std::vector<CheckResult> out;
  {
    std::string w;
    for (Pt v = 0; v < ka && w.empty(); ++v)
      if (b.p(f[v]) != a.p(v)) w = "anchors differ at " + xa.point_name(v);
    out.push_back(w.empty() ? pass_result("equiv.anchor", obj)
                            : fail_result("equiv.anchor", obj, w));
  }
  {
    std::string w;
    for (Pt ar = 0; ar < g.arrows() && w.empty(); ++ar)
      for (Pt v = 0; v < ka && w.empty(); ++v) {
        if (!a.composable(ar, v)) continue;
        if (!b.composable(ar, f[v]))
          w = "the image pair " + pair_name(b, ar, f[v]) + " is not composable";
        else if (f[a.apply(ar, v)] != b.apply(ar, f[v]))
          w = "f(" + g.g1().point_name(ar) + "." + xa.point_name(v) + ") != " +
              g.g1().point_name(ar) + ".f(" + xa.point_name(v) + ")";
      }
    out.push_back(w.empty() ? pass_result("equiv.pointwise", obj)
                            : fail_result("equiv.pointwise", obj, w));
  }
  GAction la = lift_action(a, cd);
  GAction lb = lift_action(b, cd);
  {
    std::string w;
    for (Pt v = 0; v < ka && w.empty(); ++v)
      if (lb.p(f[v]) != la.p(v)) w = "lifted anchors differ at " + xa.point_name(v);
    for (Pt ar = 0; ar < cd.ghat.arrows() && w.empty(); ++ar)
      for (Pt v = 0; v < ka && w.empty(); ++v) {
        if (!la.composable(ar, v)) continue;
        if (!lb.composable(ar, f[v]))
          w = "the lifted image pair " + pair_name(lb, ar, f[v]) + " is not composable";
        else if (f[la.apply(ar, v)] != lb.apply(ar, f[v]))
          w = "f(" + cd.ghat.g1().point_name(ar) + "." + xa.point_name(v) + ") != " +
              cd.ghat.g1().point_name(ar) + ".f(" + xa.point_name(v) + ")";
      }
    out.push_back(w.empty() ? pass_result("equiv.lifted", obj)
                            : fail_result("equiv.lifted", obj, w));
  }
  {
    QModuleData ma = module_of(la);
    QModuleData mbm = module_of(lb);
    std::map<PtMask, Elt> amask_to_elt;
    for (Elt e = 0; e < Elt(ma.xlat->size()); ++e) amask_to_elt[ma.xmask[e]] = e;
    std::vector<Elt> fs(mbm.xlat->size());
    for (Elt yb = 0; yb < Elt(mbm.xlat->size()); ++yb) {
      PtMask pre = 0;
      for (Pt v = 0; v < ka; ++v)
        if ((mbm.xmask[yb] >> f[v]) & 1u) pre |= PtMask(1) << v;
      fs[yb] = amask_to_elt.at(pre);
    }
    std::string w;
    for (Elt A = 0; A < Elt(ma.q.size()) && w.empty(); ++A)
      for (Elt yb = 0; yb < Elt(mbm.xlat->size()) && w.empty(); ++yb)
        if (fs[mbm.mul(A, yb)] != ma.mul(A, fs[yb]))
          w = "the preimage of " + ma.q.lat().name(A) + "." + mbm.xlat->name(yb) +
              " is not the action on the preimage";
    out.push_back(w.empty() ? pass_result("equiv.module_hom", obj)
                            : fail_result("equiv.module_hom", obj, w));
  }
  {
    bool base_eq = out[0].ok() && out[1].ok();
    bool lift_eq = out[2].ok();
    bool mod_eq = out[3].ok();
    std::string w;
    if (base_eq != lift_eq || lift_eq != mod_eq)
      w = std::string("the three equivariance routes split: pointwise ") +
          (base_eq ? "yes" : "no") + ", lifted " + (lift_eq ? "yes" : "no") + ", module " +
          (mod_eq ? "yes" : "no");
    out.push_back(law(defn_ok, "equiv.agreement", obj, w));
  }
  return out;
}

}  // namespace qf
