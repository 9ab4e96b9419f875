#include "qforge/hilbert.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace qf {

namespace {

bool green(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) return false;
  return true;
}

CheckResult law(bool defn_ok, std::string name, std::string obj, const std::string& w) {
  if (w.empty()) return pass_result(std::move(name), std::move(obj));
  return defn_ok ? incident_result(std::move(name), std::move(obj), w)
                 : fail_result(std::move(name), std::move(obj), w);
}

void check_shapes(const HilbertModule& h) {
  const std::size_t nq = h.q.size(), nx = h.x->size();
  if (h.act.size() != nq * nx) throw StructuralError("module action table has the wrong size");
  for (Elt e : h.act)
    if (e >= nx) throw StructuralError("module action value out of range");
  if (h.ip.size() != nx * nx) throw StructuralError("inner-product table has the wrong size");
  for (Elt e : h.ip)
    if (e >= nq) throw StructuralError("inner-product value out of range");
  if (!h.sppx.empty()) {
    if (h.sppx.size() != nx) throw StructuralError("support table has the wrong size");
    for (Elt e : h.sppx)
      if (e >= nq) throw StructuralError("support value out of range");
  }
  if (h.basis)
    for (Elt t : *h.basis)
      if (t >= nx) throw StructuralError("basis element out of range");
}

// x = \/_{t in gamma} <x,t>t over the whole carrier; empty on success.
std::string basis_defect(const HilbertModule& h, const std::vector<Elt>& gamma) {
  const std::size_t nx = h.x->size();
  for (Elt x = 0; x < Elt(nx); ++x) {
    Elt acc = h.x->bottom();
    for (Elt t : gamma) acc = h.x->join(acc, h.mul(h.inner(x, t), t));
    if (acc != x)
      return "the reconstruction of " + h.x->name(x) + " gives " + h.x->name(acc);
  }
  return "";
}

std::vector<Elt> formula_table(const Quantale& q, const LatPtr& x, const std::vector<Elt>& act,
                               const std::vector<Elt>& sppx) {
  const std::size_t nx = x->size();
  PartialUnitsResult pu = partial_units(q);
  std::vector<Elt> out(nx * nx, 0);
  for (Elt v = 0; v < Elt(nx); ++v)
    for (Elt w = 0; w < Elt(nx); ++w) {
      Elt acc = q.lat().bottom();
      for (Elt u : pu.elements) {
        Elt moved = act[std::size_t(q.star(u)) * nx + v];
        acc = q.lat().join(acc, q.mul(u, sppx[x->meet(moved, w)]));
      }
      out[std::size_t(v) * nx + w] = acc;
    }
  return out;
}

std::string local_homeo_witness(const FinSpace& x, const FinSpace& b, const std::vector<Pt>& p) {
  for (Pt v = 0; v < x.points(); ++v) {
    PtMask u = x.min_open(v);
    PtMask img = 0;
    for (Pt a = 0; a < x.points(); ++a) {
      if (!((u >> a) & 1u)) continue;
      for (Pt c = Pt(a + 1); c < x.points(); ++c)
        if (((u >> c) & 1u) && p[a] == p[c])
          return "the anchor identifies " + x.point_name(a) + " and " + x.point_name(c) +
                 " on the minimal open of " + x.point_name(v);
      img |= PtMask(1) << p[a];
    }
    if (!b.is_open(img))
      return "the anchor image of the minimal open of " + x.point_name(v) + " is not open";
    for (Pt a = 0; a < x.points(); ++a)
      for (Pt c = 0; c < x.points(); ++c)
        if (((u >> a) & 1u) && ((u >> c) & 1u) && x.leq(a, c) != b.leq(p[a], p[c]))
          return "the anchor is not an order isomorphism on the minimal open of " +
                 x.point_name(v);
  }
  return "";
}

bool same_quantale(const Quantale& a, const Quantale& b) {
  if (a.size() != b.size() || !a.lat().same_order_as(b.lat())) return false;
  for (Elt s = 0; s < Elt(a.size()); ++s) {
    if (a.star(s) != b.star(s)) return false;
    for (Elt t = 0; t < Elt(a.size()); ++t)
      if (a.mul(s, t) != b.mul(s, t)) return false;
  }
  return true;
}

bool same_groupoid(const FinGroupoid& a, const FinGroupoid& b) {
  return a.units() == b.units() && a.arrows() == b.arrows() && a.d_table() == b.d_table() &&
         a.r_table() == b.r_table() && a.m_table() == b.m_table() &&
         a.i_table() == b.i_table() && a.u_table() == b.u_table();
}

std::vector<HilbertPackage> all_packages() {
  return {HilbertPackage::pre_hilbert, HilbertPackage::hilbert, HilbertPackage::complete,
          HilbertPackage::supported, HilbertPackage::stable};
}

bool sheaf_defn_ok(const HilbertModule& h) {
  return green(validate_hilbert(h, hilbert_packages_present(h)));
}

}  // namespace

HilbertModule self_module(const Quantale& q) {
  const std::size_t n = q.size();
  HilbertModule h{q.name() + ".self", q, q.lat_ptr(), {}, {}, {}, std::nullopt};
  h.act.resize(n * n);
  h.ip.resize(n * n);
  for (Elt a = 0; a < Elt(n); ++a)
    for (Elt b = 0; b < Elt(n); ++b) {
      h.act[std::size_t(a) * n + b] = q.mul(a, b);
      h.ip[std::size_t(a) * n + b] = q.mul(a, q.star(b));
    }
  // The quantale's own support is base-valued; the module convention keeps
  // it in the quantale under the designated unit, so embed through lres.
  if (q.has_support() && q.unital() && q.has_base()) {
    h.sppx.resize(n);
    for (Elt a = 0; a < Elt(n); ++a) h.sppx[a] = q.lres(q.spp(a), q.unit());
  }
  return h;
}

HilbertModule sheaf_of(const GAction& a) {
  GroupoidReport rep = validate_groupoid(a.g());
  if (!rep.etale) throw UsageError("the sheaf construction needs an etale groupoid");
  std::string lw = local_homeo_witness(a.x(), a.g().g0(), a.p_table());
  if (!lw.empty()) throw UsageError("the anchor is not a local homeomorphism: " + lw);

  QModuleData m = module_of(a);
  const FinGroupoid& g = a.g();
  SpatialFrame sf1 = opens_of(g.g1());
  const std::size_t nx = m.xlat->size();

  std::vector<Elt> sppx(nx);
  for (Elt v = 0; v < Elt(nx); ++v) {
    PtMask em = 0;
    for (Pt pt = 0; pt < a.x().points(); ++pt)
      if ((m.xmask[v] >> pt) & 1u) em |= PtMask(1) << g.unit(a.p(pt));
    if (!g.g1().is_open(em))
      throw UsageError("the anchor image of " + m.xlat->name(v) + " has no open unit trace");
    sppx[v] = sf1.by_mask(em);
  }
  std::vector<Elt> ip = formula_table(m.q, m.xlat, m.act, sppx);
  return HilbertModule{a.name(),         std::move(m.q), std::move(m.xlat), std::move(m.act),
                       std::move(ip),    std::move(sppx), std::nullopt};
}

const char* hilbert_package_name(HilbertPackage p) {
  switch (p) {
    case HilbertPackage::pre_hilbert: return "pre-hilbert";
    case HilbertPackage::hilbert: return "hilbert";
    case HilbertPackage::complete: return "complete";
    case HilbertPackage::supported: return "supported";
    case HilbertPackage::stable: return "stable";
  }
  return "?";
}

std::vector<HilbertPackage> hilbert_packages_present(const HilbertModule& h) {
  std::vector<HilbertPackage> out = {HilbertPackage::pre_hilbert, HilbertPackage::hilbert};
  if (h.basis || h.x->size() <= 16) out.push_back(HilbertPackage::complete);
  if (h.has_support() && h.q.unital()) {
    out.push_back(HilbertPackage::supported);
    out.push_back(HilbertPackage::stable);
  }
  return out;
}

std::vector<CheckResult> validate_hilbert(const HilbertModule& h,
                                          const std::vector<HilbertPackage>& packages) {
  check_shapes(h);
  const std::string obj = h.object;
  const SupLattice& L = h.q.lat();
  const SupLattice& X = *h.x;
  const std::size_t nq = h.q.size(), nx = X.size();
  auto want = [&](HilbertPackage p) {
    return std::find(packages.begin(), packages.end(), p) != packages.end();
  };
  std::vector<CheckResult> out;

  // The pre-Hilbert layer is the definitional floor for the later packages,
  // so it is computed even when only they were requested.
  std::vector<CheckResult> pre;
  {
    if (nq * nq * nx > (std::size_t(1) << 26)) {
      pre.push_back(skipped_result("hilbert.module_assoc", obj,
                                   "associativity scan exceeds the cell guard"));
    } else {
      std::string w;
      for (Elt a = 0; a < Elt(nq) && w.empty(); ++a)
        for (Elt b = 0; b < Elt(nq) && w.empty(); ++b)
          for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
            if (h.mul(h.q.mul(a, b), v) != h.mul(a, h.mul(b, v)))
              w = "(" + L.name(a) + " " + L.name(b) + ")." + X.name(v) + " != nested";
      pre.push_back(w.empty() ? pass_result("hilbert.module_assoc", obj)
                              : fail_result("hilbert.module_assoc", obj, w));
    }
    if (nq * nq * nx > (std::size_t(1) << 26) || nq * nx * nx > (std::size_t(1) << 26)) {
      pre.push_back(
          skipped_result("hilbert.module_joins", obj, "join scan exceeds the cell guard"));
    } else {
      std::string w;
      if (h.mul(L.bottom(), X.top()) != X.bottom()) w = "bottom.top != bottom";
      for (Elt a = 0; a < Elt(nq) && w.empty(); ++a)
        if (h.mul(a, X.bottom()) != X.bottom()) w = L.name(a) + ".bottom != bottom";
      for (Elt a = 0; a < Elt(nq) && w.empty(); ++a)
        for (Elt b = a; b < Elt(nq) && w.empty(); ++b)
          for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
            if (h.mul(L.join(a, b), v) != X.join(h.mul(a, v), h.mul(b, v)))
              w = "join not preserved in the quantale slot at (" + L.name(a) + "," + L.name(b) +
                  ")." + X.name(v);
      for (Elt a = 0; a < Elt(nq) && w.empty(); ++a)
        for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
          for (Elt u = v; u < Elt(nx) && w.empty(); ++u)
            if (h.mul(a, X.join(v, u)) != X.join(h.mul(a, v), h.mul(a, u)))
              w = "join not preserved in the carrier slot at " + L.name(a) + ".(" + X.name(v) +
                  "," + X.name(u) + ")";
      pre.push_back(w.empty() ? pass_result("hilbert.module_joins", obj)
                              : fail_result("hilbert.module_joins", obj, w));
    }
    if (!h.q.unital()) {
      pre.push_back(
          skipped_result("hilbert.module_unital", obj, "the quantale has no designated unit"));
    } else {
      std::string uw;
      for (Elt v = 0; v < Elt(nx) && uw.empty(); ++v)
        if (h.mul(h.q.unit(), v) != v) uw = "e." + X.name(v) + " != " + X.name(v);
      pre.push_back(uw.empty() ? pass_result("hilbert.module_unital", obj)
                               : fail_result("hilbert.module_unital", obj, uw));
    }
    if (nq * nx * nx > (std::size_t(1) << 26)) {
      pre.push_back(
          skipped_result("hilbert.ip_linear", obj, "linearity scan exceeds the cell guard"));
    } else {
      std::string lw;
      for (Elt a = 0; a < Elt(nq) && lw.empty(); ++a)
        for (Elt v = 0; v < Elt(nx) && lw.empty(); ++v)
          for (Elt u = 0; u < Elt(nx) && lw.empty(); ++u)
            if (h.inner(h.mul(a, v), u) != h.q.mul(a, h.inner(v, u)))
              lw = "<" + L.name(a) + "." + X.name(v) + "," + X.name(u) + "> != " + L.name(a) +
                   "<" + X.name(v) + "," + X.name(u) + ">";
      pre.push_back(lw.empty() ? pass_result("hilbert.ip_linear", obj)
                               : fail_result("hilbert.ip_linear", obj, lw));
    }
    if (nx * nx * nx > (std::size_t(1) << 26)) {
      pre.push_back(
          skipped_result("hilbert.ip_joins", obj, "join scan exceeds the cell guard"));
    } else {
      std::string jw;
      for (Elt u = 0; u < Elt(nx) && jw.empty(); ++u)
        if (h.inner(X.bottom(), u) != L.bottom()) jw = "<bottom," + X.name(u) + "> != bottom";
      for (Elt v = 0; v < Elt(nx) && jw.empty(); ++v)
        for (Elt u = v; u < Elt(nx) && jw.empty(); ++u)
          for (Elt y = 0; y < Elt(nx) && jw.empty(); ++y)
            if (h.inner(X.join(v, u), y) != L.join(h.inner(v, y), h.inner(u, y)))
              jw = "<" + X.name(v) + " v " + X.name(u) + "," + X.name(y) + "> is not the join";
      pre.push_back(jw.empty() ? pass_result("hilbert.ip_joins", obj)
                               : fail_result("hilbert.ip_joins", obj, jw));
    }
    std::string sw;
    for (Elt v = 0; v < Elt(nx) && sw.empty(); ++v)
      for (Elt u = 0; u < Elt(nx) && sw.empty(); ++u)
        if (h.inner(v, u) != h.q.star(h.inner(u, v)))
          sw = "<" + X.name(v) + "," + X.name(u) + "> != <" + X.name(u) + "," + X.name(v) +
               ">*";
    pre.push_back(sw.empty() ? pass_result("hilbert.ip_symmetry", obj)
                             : fail_result("hilbert.ip_symmetry", obj, sw));
  }
  const bool pre_ok = green(pre);
  if (want(HilbertPackage::pre_hilbert))
    for (const auto& r : pre) out.push_back(r);

  if (want(HilbertPackage::hilbert)) {
    if (nx * nx * nx > (std::size_t(1) << 26)) {
      out.push_back(skipped_result("hilbert.non_degenerate", obj,
                                   "the row scan exceeds the cell guard"));
    } else {
      std::string w;
      for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
        for (Elt u = Elt(v + 1); u < Elt(nx) && w.empty(); ++u) {
          bool equal = true;
          for (Elt y = 0; y < Elt(nx) && equal; ++y)
            if (h.inner(v, y) != h.inner(u, y)) equal = false;
          if (equal) w = "the rows of " + X.name(v) + " and " + X.name(u) + " coincide";
        }
      out.push_back(w.empty() ? pass_result("hilbert.non_degenerate", obj)
                              : fail_result("hilbert.non_degenerate", obj, w));
    }
  }

  if (want(HilbertPackage::complete)) {
    if (h.basis) {
      std::string w = basis_defect(h, *h.basis);
      out.push_back(w.empty() ? pass_result("hilbert.complete", obj)
                              : fail_result("hilbert.complete", obj, w));
    } else if (nx > 16) {
      throw UsageError("the completeness search needs a stored basis beyond 16 carrier elements");
    } else {
      bool found = false;
      for (std::size_t k = 0; k <= 4 && !found; ++k)
        for (PtMask mask = 0; mask < (PtMask(1) << nx) && !found; ++mask) {
          if (std::size_t(__builtin_popcount(mask)) != k) continue;
          std::vector<Elt> gamma;
          for (Elt t = 0; t < Elt(nx); ++t)
            if ((mask >> t) & 1u) gamma.push_back(t);
          if (basis_defect(h, gamma).empty()) found = true;
        }
      out.push_back(found ? pass_result("hilbert.complete", obj)
                          : fail_result("hilbert.complete", obj,
                                        "no subset of size <= 4 is a Hilbert basis"));
    }
  }

  std::vector<CheckResult> sup;
  bool sup_ok = false;
  if (want(HilbertPackage::supported) || want(HilbertPackage::stable)) {
    if (!h.has_support()) throw UsageError("the supported package needs a support table");
    if (!h.q.unital()) throw UsageError("the supported package needs a designated unit");
    const Elt e = h.q.unit();
    {
      std::string w;
      for (Elt v = 0; v < Elt(nx) && w.empty(); ++v) {
        if (!L.leq(h.spp(v), e)) w = "spp(" + X.name(v) + ") is not under the unit";
        for (Elt u = 0; u < Elt(nx) && w.empty(); ++u)
          if (X.leq(v, u) && !L.leq(h.spp(v), h.spp(u)))
            w = "spp is not monotone at " + X.name(v) + " <= " + X.name(u);
      }
      sup.push_back(w.empty() ? pass_result("hilbert.support_shape", obj)
                              : fail_result("hilbert.support_shape", obj, w));
    }
    {
      std::string w;
      for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
        if (!L.leq(h.spp(v), h.inner(v, v)))
          w = "spp(" + X.name(v) + ") exceeds <" + X.name(v) + "," + X.name(v) + ">";
      sup.push_back(w.empty() ? pass_result("hilbert.support_bound", obj)
                              : fail_result("hilbert.support_bound", obj, w));
    }
    {
      std::string w;
      for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
        if (!X.leq(v, h.mul(h.spp(v), v)))
          w = X.name(v) + " is not recovered by its support";
      sup.push_back(w.empty() ? pass_result("hilbert.support_recovers", obj)
                              : fail_result("hilbert.support_recovers", obj, w));
    }
    sup_ok = green(sup);
    if (want(HilbertPackage::supported))
      for (const auto& r : sup) out.push_back(r);
  }

  if (want(HilbertPackage::stable)) {
    const Elt e = h.q.unit();
    std::vector<Elt> belems;
    for (Elt b = 0; b < Elt(nq); ++b)
      if (L.leq(b, e)) belems.push_back(b);

    std::string w1;
    for (Elt b : belems)
      for (Elt v = 0; v < Elt(nx) && w1.empty(); ++v)
        if (h.spp(h.mul(b, v)) != L.meet(b, h.spp(v)))
          w1 = "spp(" + L.name(b) + "." + X.name(v) + ") != " + L.name(b) + " /\\ spp(" +
               X.name(v) + ")";
    out.push_back(w1.empty() ? pass_result("hilbert.stable_meet", obj)
                             : fail_result("hilbert.stable_meet", obj, w1));

    // The quantale's support lands in the base; read it under the unit.
    bool have_q_spp = h.q.has_support() && h.q.has_base();
    auto qspp = [&](Elt a) { return h.q.lres(h.q.spp(a), h.q.unit()); };
    std::string w2, w3;
    if (!have_q_spp) {
      out.push_back(
          skipped_result("hilbert.stable_transport", obj, "the quantale has no support"));
      out.push_back(skipped_result("hilbert.stable_bound", obj, "the quantale has no support"));
    } else {
      for (Elt b : belems)
        for (Elt v = 0; v < Elt(nx) && w2.empty(); ++v)
          if (h.spp(h.mul(b, v)) != qspp(h.q.mul(b, h.spp(v))))
            w2 = "spp(" + L.name(b) + "." + X.name(v) + ") != spp_Q(" + L.name(b) + " spp(" +
                 X.name(v) + "))";
      out.push_back(w2.empty() ? pass_result("hilbert.stable_transport", obj)
                               : fail_result("hilbert.stable_transport", obj, w2));
      for (Elt b : belems)
        for (Elt v = 0; v < Elt(nx) && w3.empty(); ++v)
          if (!L.leq(h.spp(h.mul(b, v)), qspp(b)))
            w3 = "spp(" + L.name(b) + "." + X.name(v) + ") exceeds spp_Q(" + L.name(b) + ")";
      out.push_back(w3.empty() ? pass_result("hilbert.stable_bound", obj)
                               : fail_result("hilbert.stable_bound", obj, w3));
    }

    if (!have_q_spp) {
      out.push_back(
          skipped_result("hilbert.stability_equivalence", obj, "the quantale has no support"));
    } else {
      bool c1 = w1.empty(), c2 = w2.empty(), c3 = w3.empty();
      std::string w;
      if (c1 != c2 || c2 != c3)
        w = std::string("the stability conditions split: meet ") + (c1 ? "yes" : "no") +
            ", transport " + (c2 ? "yes" : "no") + ", bound " + (c3 ? "yes" : "no");
      out.push_back(law(pre_ok && sup_ok, "hilbert.stability_equivalence", obj, w));
    }

    bool q_stable = have_q_spp;
    if (have_q_spp)
      for (Elt a = 0; a < Elt(nq) && q_stable; ++a)
        for (Elt b = 0; b < Elt(nq) && q_stable; ++b)
          if (h.q.spp(h.q.mul(a, b)) != h.q.spp(h.q.mul(a, qspp(b)))) q_stable = false;
    const std::string not_stable = have_q_spp ? "the quantale is not stably supported"
                                              : "the quantale has no support";
    if (!q_stable) {
      out.push_back(skipped_result("hilbert.stable_forced", obj, not_stable));
      out.push_back(skipped_result("hilbert.support_ip_bounds", obj, not_stable));
      out.push_back(skipped_result("hilbert.support_action_meet", obj, not_stable));
      out.push_back(skipped_result("hilbert.support_unit_meet", obj, not_stable));
    } else {
      out.push_back(law(pre_ok && sup_ok, "hilbert.stable_forced", obj, w1));
      std::string bw;
      for (Elt v = 0; v < Elt(nx) && bw.empty(); ++v) {
        for (Elt u = 0; u < Elt(nx) && bw.empty(); ++u)
          if (!L.leq(qspp(h.inner(v, u)), h.spp(v)))
            bw = "spp_Q(<" + X.name(v) + "," + X.name(u) + ">) exceeds spp(" + X.name(v) + ")";
        if (bw.empty() && h.spp(v) != qspp(h.inner(v, v)))
          bw = "spp(" + X.name(v) + ") != spp_Q(<" + X.name(v) + "," + X.name(v) + ">)";
        if (bw.empty() && h.spp(v) != qspp(h.inner(v, X.top())))
          bw = "spp(" + X.name(v) + ") != spp_Q(<" + X.name(v) + ",top>)";
      }
      out.push_back(law(pre_ok && sup_ok, "hilbert.support_ip_bounds", obj, bw));
      std::string mw;
      for (Elt v = 0; v < Elt(nx) && mw.empty(); ++v)
        for (Elt a = 0; a < Elt(nq) && mw.empty(); ++a)
          if (h.q.mul(h.spp(v), a) != L.meet(h.inner(v, X.top()), a))
            mw = "spp(" + X.name(v) + ")" + L.name(a) + " != <" + X.name(v) + ",top> /\\ " +
                 L.name(a);
      out.push_back(law(pre_ok && sup_ok, "hilbert.support_action_meet", obj, mw));
      std::string uw;
      for (Elt v = 0; v < Elt(nx) && uw.empty(); ++v) {
        if (h.spp(v) != L.meet(h.inner(v, X.top()), e))
          uw = "spp(" + X.name(v) + ") != <" + X.name(v) + ",top> /\\ e";
        else if (h.spp(v) != L.meet(h.inner(v, v), e))
          uw = "spp(" + X.name(v) + ") != <" + X.name(v) + "," + X.name(v) + "> /\\ e";
      }
      out.push_back(law(pre_ok && sup_ok, "hilbert.support_unit_meet", obj, uw));
    }
  }
  return out;
}

InnerFormulaResult inner_product_formula(const HilbertModule& h) {
  check_shapes(h);
  if (!h.q.unital())
    throw UsageError("the inner-product formula needs a designated unit");
  if (!h.has_support()) throw UsageError("the inner-product formula needs a support table");
  InnerFormulaResult out{formula_table(h.q, h.x, h.act, h.sppx), {}};
  const std::size_t nx = h.x->size();
  std::string w;
  for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
    for (Elt u = 0; u < Elt(nx) && w.empty(); ++u)
      if (out.table[std::size_t(v) * nx + u] != h.inner(v, u))
        w = "the formula gives " + h.q.lat().name(out.table[std::size_t(v) * nx + u]) +
            " at <" + h.x->name(v) + "," + h.x->name(u) + ">, the table " +
            h.q.lat().name(h.inner(v, u));
  out.checks.push_back(law(sheaf_defn_ok(h), "hilbert.ip_formula", h.object, w));
  return out;
}

SectionsResult hilbert_sections(const HilbertModule& h) {
  check_shapes(h);
  if (!h.has_support()) throw UsageError("the local sections need a support table");
  const std::string obj = h.object;
  const SupLattice& X = *h.x;
  const std::size_t nx = X.size();

  SectionsResult out;
  for (Elt s = 0; s < Elt(nx); ++s) {
    bool hs = true;
    for (Elt v = 0; v < Elt(nx) && hs; ++v)
      if (!X.leq(h.mul(h.inner(v, s), s), v)) hs = false;
    if (hs) out.hilbert.push_back(s);
    bool ls = true;
    for (Elt v = 0; v < Elt(nx) && ls; ++v)
      if (X.leq(v, s) && h.mul(h.spp(v), s) != v) ls = false;
    if (ls) out.local.push_back(s);
  }

  const bool defn_ok = sheaf_defn_ok(h);
  {
    std::string w;
    for (Elt s : out.hilbert)
      if (std::find(out.local.begin(), out.local.end(), s) == out.local.end()) {
        w = X.name(s) + " is a Hilbert section but not a local section";
        break;
      }
    if (w.empty())
      for (Elt s : out.local)
        if (std::find(out.hilbert.begin(), out.hilbert.end(), s) == out.hilbert.end()) {
          w = X.name(s) + " is a local section but not a Hilbert section";
          break;
        }
    out.checks.push_back(law(defn_ok, "hilbert.sections_agree", obj, w));
  }
  if (!h.basis) {
    out.checks.push_back(skipped_result("hilbert.basis_sections", obj, "no basis stored"));
  } else {
    std::string w;
    for (Elt t : *h.basis)
      if (std::find(out.hilbert.begin(), out.hilbert.end(), t) == out.hilbert.end()) {
        w = "the basis element " + X.name(t) + " is not a Hilbert section";
        break;
      }
    out.checks.push_back(law(defn_ok, "hilbert.basis_sections", obj, w));
  }
  out.checks.push_back(
      law(defn_ok, "hilbert.sections_basis", obj, basis_defect(h, out.local)));
  return out;
}

CheckResult check_O_sheaf(const HilbertModule& h, const IEQFData& ieq) {
  check_shapes(h);
  if (!same_quantale(h.q, ieq.oghat))
    throw UsageError("the sheaf is not over the covering quantale");
  std::vector<char> img(ieq.oghat.size(), 0);
  for (Elt a = 0; a < Elt(ieq.og.size()); ++a) img[ieq.j(a)] = 1;
  const std::size_t nx = h.x->size();
  for (Elt v = 0; v < Elt(nx); ++v)
    for (Elt u = 0; u < Elt(nx); ++u)
      if (!img[h.inner(v, u)])
        return fail_result("hilbert.o_sheaf", h.object,
                           "<" + h.x->name(v) + "," + h.x->name(u) + "> = " +
                               h.q.lat().name(h.inner(v, u)) +
                               " lies outside the embedded quantale");
  return pass_result("hilbert.o_sheaf", h.object);
}

std::vector<CheckResult> thm_descent_iff_inner(const GAction& xhat, const CoverAssembly& ca,
                                               const IEQFData& ieq) {
  DescentResult dr = check_descent(xhat, ca);
  HilbertModule h = sheaf_of(xhat);
  CheckResult os = check_O_sheaf(h, ieq);
  const bool defn_ok = green(validate_action(xhat)) && sheaf_defn_ok(h);

  std::vector<CheckResult> out;
  out.push_back(dr.verdict);
  out.push_back(os);
  std::string w;
  if (dr.verdict.ok() != os.ok())
    w = std::string("descent says ") + (dr.verdict.ok() ? "yes" : "no") +
        ", the inner product says " + (os.ok() ? "yes" : "no") +
        "; descent: " + (dr.verdict.witness.empty() ? "pass" : dr.verdict.witness) +
        "; membership: " + (os.witness.empty() ? "pass" : os.witness);
  out.push_back(law(defn_ok, "hilbert.descent_iff_inner", xhat.name(), w));
  return out;
}

std::vector<CheckResult> check_sheaf_hom(const std::vector<Elt>& f, const HilbertModule& hx,
                                         const HilbertModule& hy) {
  check_shapes(hx);
  check_shapes(hy);
  if (!same_quantale(hx.q, hy.q))
    throw UsageError("a sheaf homomorphism needs modules over one quantale");
  if (!hx.has_support() || !hy.has_support())
    throw UsageError("the sheaf conditions need support tables on both modules");
  const SupLattice& X = *hx.x;
  const SupLattice& Y = *hy.x;
  const std::size_t nx = X.size();
  if (f.size() != nx) throw StructuralError("map table has the wrong size");
  for (Elt e : f)
    if (e >= Y.size()) throw StructuralError("map value out of range");
  const std::string obj = hx.object + " -> " + hy.object;

  std::vector<CheckResult> out;
  {
    std::string w;
    if (f[X.bottom()] != Y.bottom()) w = "f(bottom) != bottom";
    for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
      for (Elt u = v; u < Elt(nx) && w.empty(); ++u)
        if (f[X.join(v, u)] != Y.join(f[v], f[u]))
          w = "f does not preserve the join of " + X.name(v) + " and " + X.name(u);
    out.push_back(w.empty() ? pass_result("hilbert.hom_sup", obj)
                            : fail_result("hilbert.hom_sup", obj, w));
  }
  {
    std::string w;
    for (Elt a = 0; a < Elt(hx.q.size()) && w.empty(); ++a)
      for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
        if (f[hx.mul(a, v)] != hy.mul(a, f[v]))
          w = "f(" + hx.q.lat().name(a) + "." + X.name(v) + ") != " + hx.q.lat().name(a) +
              ".f(" + X.name(v) + ")";
    out.push_back(w.empty() ? pass_result("hilbert.hom_module", obj)
                            : fail_result("hilbert.hom_module", obj, w));
  }
  {
    std::string w;
    for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
      if (hy.spp(f[v]) != hx.spp(v))
        w = "spp(f(" + X.name(v) + ")) != spp(" + X.name(v) + ")";
    out.push_back(w.empty() ? pass_result("hilbert.hom_support", obj)
                            : fail_result("hilbert.hom_support", obj, w));
  }
  {
    SectionsResult sx = hilbert_sections(hx);
    SectionsResult sy = hilbert_sections(hy);
    std::string w;
    for (Elt s : sx.local)
      if (std::find(sy.local.begin(), sy.local.end(), f[s]) == sy.local.end()) {
        w = "f(" + X.name(s) + ") = " + Y.name(f[s]) + " is not a local section";
        break;
      }
    out.push_back(w.empty() ? pass_result("hilbert.hom_sections", obj)
                            : fail_result("hilbert.hom_sections", obj, w));
  }
  return out;
}

BilocaleSheafData self_bilocale(const IEQFData& ieq) {
  const Quantale& q = ieq.oghat;
  const std::size_t n = q.size();
  BilocaleSheafData d{q.name() + ".self", q, q.lat_ptr(), {}, q, {}};
  d.lact.resize(n * n);
  d.ip.resize(n * n);
  for (Elt a = 0; a < Elt(n); ++a)
    for (Elt b = 0; b < Elt(n); ++b) {
      d.lact[std::size_t(a) * n + b] = q.mul(a, b);
      d.ip[std::size_t(a) * n + b] = q.mul(q.star(a), b);
    }
  return d;
}

std::vector<CheckResult> check_adjointness(const BilocaleSheafData& d, const IEQFData& ieq) {
  if (!same_quantale(d.q1, ieq.oghat))
    throw UsageError("the left action is not over the covering quantale");
  const std::size_t n1 = d.q1.size(), nx = d.x->size(), n2 = d.q2.size();
  if (d.lact.size() != n1 * nx) throw StructuralError("left action table has the wrong size");
  if (d.ip.size() != nx * nx) throw StructuralError("inner-product table has the wrong size");
  for (Elt e : d.lact)
    if (e >= nx) throw StructuralError("left action value out of range");
  for (Elt e : d.ip)
    if (e >= n2) throw StructuralError("inner-product value out of range");
  auto act = [&](Elt a, Elt v) { return d.lact[std::size_t(a) * nx + v]; };
  auto ip = [&](Elt v, Elt u) { return d.ip[std::size_t(v) * nx + u]; };

  bool defn_ok = true;
  for (Elt a = 0; a < Elt(ieq.og.size()) && defn_ok; ++a)
    if (ieq.oghat.star(ieq.j(a)) != ieq.j(ieq.og.star(a))) defn_ok = false;
  for (Elt v = 0; v < Elt(nx) && defn_ok; ++v)
    for (Elt u = 0; u < Elt(nx) && defn_ok; ++u)
      if (ip(v, u) != d.q2.star(ip(u, v))) defn_ok = false;
  for (Elt a = 0; a < Elt(n1) && defn_ok; ++a)
    for (Elt b = 0; b < Elt(n1) && defn_ok; ++b)
      for (Elt v = 0; v < Elt(nx) && defn_ok; ++v)
        if (act(d.q1.mul(a, b), v) != act(a, act(b, v))) defn_ok = false;

  std::string w;
  for (Elt a = 0; a < Elt(ieq.og.size()) && w.empty(); ++a)
    for (Elt v = 0; v < Elt(nx) && w.empty(); ++v)
      for (Elt u = 0; u < Elt(nx) && w.empty(); ++u)
        if (ip(act(ieq.j(a), v), u) != ip(v, act(ieq.j(ieq.og.star(a)), u)))
          w = "(" + ieq.og.lat().name(a) + ", " + d.x->name(v) + ", " + d.x->name(u) + ")";
  return {law(defn_ok, "hilbert.adjointness", d.object, w)};
}

std::vector<CheckResult> sheaf_anchor_checks(const HilbertModule& h) {
  check_shapes(h);
  if (!h.q.unital()) throw UsageError("the anchor construction needs a designated unit");
  if (!h.has_support()) throw UsageError("the anchor construction needs a support table");
  const SupLattice& L = h.q.lat();
  const std::string obj = h.object;

  std::vector<Elt> dn;
  std::vector<Elt> dn_id(h.q.size(), no_elt);
  for (Elt b = 0; b < Elt(h.q.size()); ++b)
    if (L.leq(b, h.q.unit())) {
      dn_id[b] = Elt(dn.size());
      dn.push_back(b);
    }
  std::vector<std::string> names;
  std::vector<std::pair<Elt, Elt>> pairs;
  for (Elt b : dn) names.push_back(L.name(b));
  for (std::size_t i = 0; i < dn.size(); ++i)
    for (std::size_t j = 0; j < dn.size(); ++j)
      if (L.leq(dn[i], dn[j])) pairs.emplace_back(Elt(i), Elt(j));
  LatPtr dlat = make_lattice(std::move(names), pairs);

  Spectrum sx = spectrum(h.x, obj + ".pts");
  Spectrum sd = spectrum(dlat, obj + ".base");
  std::string w;
  std::vector<Pt> p(sx.space.points(), no_pt);
  for (Pt v = 0; v < sx.space.points() && w.empty(); ++v) {
    Elt sv = dn_id[h.spp(sx.point_elt[v])];
    if (sv == no_elt) {
      w = "the support of the point " + sx.space.point_name(v) + " is not under the unit";
      break;
    }
    Pt hit = no_pt;
    for (Pt u = 0; u < sd.space.points(); ++u)
      if (sd.point_elt[u] == sv) hit = u;
    if (hit == no_pt)
      w = "the support of the point " + sx.space.point_name(v) +
          " is not a point of the unit downset";
    p[v] = hit;
  }
  if (w.empty()) {
    try {
      CMap pm(&sx.space, &sd.space, p);
      w = local_homeo_witness(sx.space, sd.space, p);
    } catch (const StructuralError&) {
      w = "the anchor is not continuous";
    }
  }
  return {law(sheaf_defn_ok(h), "hilbert.anchor_etale", obj, w)};
}

namespace {

bool isomorphic_actions(const GAction& a, const GAction& b) {
  const std::size_t k = a.x().points();
  if (b.x().points() != k) return false;
  std::vector<Pt> perm(k);
  for (Pt v = 0; v < k; ++v) perm[v] = v;
  do {
    bool ok = true;
    for (Pt v = 0; v < k && ok; ++v) {
      if (b.p(perm[v]) != a.p(v)) ok = false;
      for (Pt u = 0; u < k && ok; ++u)
        if (a.x().leq(v, u) != b.x().leq(perm[v], perm[u])) ok = false;
    }
    for (Pt ar = 0; ar < a.g().arrows() && ok; ++ar)
      for (Pt v = 0; v < k && ok; ++v) {
        if (!a.composable(ar, v)) continue;
        if (!b.composable(ar, perm[v]) || perm[a.apply(ar, v)] != b.apply(ar, perm[v]))
          ok = false;
      }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

std::vector<CheckResult> sheaf_correspondence(const std::vector<GAction>& cover_sheaves,
                                              const std::vector<GAction>& base_sheaves,
                                              const CoverAssembly& ca, const IEQFData& ieq) {
  const std::string obj = "sheaves(" + ca.base.name() + ")";
  CoverData cd{ca.ghat, ca.j0, ca.j1};
  for (const GAction& s : cover_sheaves) {
    if (!same_groupoid(s.g(), ca.ghat))
      throw UsageError("the cover sheaf " + s.name() + " is not over the covering groupoid");
    if (opens_of(s.x()).lat->size() > 8)
      throw CapacityError("the correspondence scan caps carriers at 8 opens");
  }
  for (const GAction& s : base_sheaves) {
    if (!same_groupoid(s.g(), ca.base))
      throw UsageError("the base sheaf " + s.name() + " is not over the base groupoid");
    if (opens_of(s.x()).lat->size() > 8)
      throw CapacityError("the correspondence scan caps carriers at 8 opens");
  }

  bool defn_ok = true;
  std::vector<CheckResult> out;
  std::vector<const GAction*> descending;
  std::vector<GAction> descents;
  std::string w_iff;
  for (const GAction& s : cover_sheaves) {
    HilbertModule h = sheaf_of(s);
    defn_ok = defn_ok && green(validate_action(s)) && sheaf_defn_ok(h);
    DescentResult dr = check_descent(s, ca);
    bool os = check_O_sheaf(h, ieq).ok();
    if (dr.verdict.ok() != os && w_iff.empty())
      w_iff = s.name() + (dr.verdict.ok() ? " descends but its inner product escapes"
                                          : " has an embedded inner product but no descent");
    if (dr.descended) {
      descending.push_back(&s);
      descents.push_back(std::move(*dr.descended));
    }
  }
  out.push_back(law(defn_ok, "hilbert.corr_iff", obj, w_iff));

  std::string w_lift, w_round;
  for (const GAction& t : base_sheaves) {
    GAction lifted = lift_action(t, cd);
    defn_ok = defn_ok && green(validate_action(t));
    CheckResult os = check_O_sheaf(sheaf_of(lifted), ieq);
    if (!os.ok() && w_lift.empty())
      w_lift = "the lift of " + t.name() + " escapes: " + os.witness;
    DescentResult dr = check_descent(lifted, ca);
    if (w_round.empty()) {
      if (!dr.descended)
        w_round = "the lift of " + t.name() + " does not descend: " + dr.verdict.witness;
      else if (dr.descended->p_table() != t.p_table() ||
               dr.descended->act_table() != t.act_table())
        w_round = "the lift of " + t.name() + " descends to a different action";
    }
  }
  out.push_back(law(defn_ok, "hilbert.corr_lift_valid", obj, w_lift));
  out.push_back(law(defn_ok, "hilbert.corr_roundtrip", obj, w_round));

  std::string w_bij;
  for (std::size_t i = 0; i < descending.size() && w_bij.empty(); ++i)
    for (std::size_t j = i + 1; j < descending.size() && w_bij.empty(); ++j) {
      bool up = isomorphic_actions(*descending[i], *descending[j]);
      bool down = isomorphic_actions(descents[i], descents[j]);
      if (up != down)
        w_bij = "descent separates " + descending[i]->name() + " and " +
                descending[j]->name() + " differently from the cover side";
    }
  out.push_back(law(defn_ok, "hilbert.corr_bijection", obj, w_bij));
  return out;
}

}  // namespace qf
