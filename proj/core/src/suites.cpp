#include "qforge/suites.hpp"

#include <algorithm>
#include <tuple>

#include "qforge/hilbert.hpp"

namespace qf {

namespace {

using Checks = std::vector<CheckResult>;

void add(Checks& out, CheckResult c) { out.push_back(std::move(c)); }
void add(Checks& out, Checks cs) {
  for (auto& c : cs) out.push_back(std::move(c));
}

// Capacity limits turn into skipped checks; a skip never changes the verdict.
template <typename Fn>
void guarded(Checks& out, const std::string& name, const std::string& object, Fn&& fn) {
  try {
    fn();
  } catch (const CapacityError& e) {
    add(out, skipped_result(name, object, e.what()));
  }
}

// The adjunction battery for the inverse image of one continuous map.
void inverse_image_battery(Checks& out, const CMap& f, const SpatialFrame& src,
                           const SpatialFrame& tgt, const std::string& object) {
  SupMap fstar = inverse_image_map(f, tgt, src);
  add(out, validate_supmap(fstar, object));
  MonoMap radj = right_adjoint(fstar);
  add(out, check_adjunction(fstar, radj, object));
  add(out, check_meet_preservation(radj, object));
}

void map_batteries(Checks& out, const Workspace& w, bool frame_side, uint64_t seed) {
  for (const auto& ng : w.groupoids) {
    const FinGroupoid& g = ng.g;
    guarded(out, "suplat.opens", ng.name, [&] {
      SpatialFrame f1 = opens_of(g.g1());
      SpatialFrame f0 = opens_of(g.g0());
      if (!frame_side) {
        add(out, validate_suplattice(*f1.lat, "O(" + ng.arrows + ")", seed));
        add(out, validate_suplattice(*f0.lat, "O(" + ng.objects + ")", seed));
      }
      try {
        CMap dm(&g.g1(), &g.g0(), g.d_table());
        CMap rm(&g.g1(), &g.g0(), g.r_table());
        if (frame_side) {
          MapClass dc = classify_map(dm);
          MapClass rc = classify_map(rm);
          add(out, check_open_frame_side(dm, dc.open, ng.name + ".d"));
          add(out, check_open_frame_side(rm, rc.open, ng.name + ".r"));
        } else {
          inverse_image_battery(out, dm, f1, f0, ng.name + ".d*");
          inverse_image_battery(out, rm, f1, f0, ng.name + ".r*");
        }
      } catch (const StructuralError& e) {
        add(out, skipped_result("suplat.maps", ng.name,
                                std::string("structure map not continuous: ") + e.what()));
      }
    });
  }
  for (const auto& na : w.actions) {
    const GAction& a = na.a;
    guarded(out, "suplat.opens", na.name, [&] {
      SpatialFrame fx = opens_of(a.x());
      SpatialFrame f0 = opens_of(a.g().g0());
      if (!frame_side) add(out, validate_suplattice(*fx.lat, "O(" + na.carrier + ")", seed));
      try {
        CMap pm(&a.x(), &a.g().g0(), a.p_table());
        if (frame_side) {
          MapClass pc = classify_map(pm);
          add(out, check_open_frame_side(pm, pc.open, na.name + ".p"));
        } else {
          inverse_image_battery(out, pm, fx, f0, na.name + ".p*");
        }
      } catch (const StructuralError& e) {
        add(out, skipped_result("suplat.maps", na.name,
                                std::string("anchor not continuous: ") + e.what()));
      }
    });
  }
}

void suite_suplat(Checks& out, const Workspace& w, const SuiteOptions& opt) {
  for (const auto& [name, sp] : w.spaces)
    guarded(out, "suplat.opens", name, [&, n = name] {
      SpatialFrame fr = opens_of(sp);
      add(out, validate_suplattice(*fr.lat, "O(" + n + ")", opt.seed));
      add(out, validate_frame(*fr.lat, "O(" + n + ")"));
    });
  for (const auto& [name, q] : w.quantales)
    add(out, validate_suplattice(q.lat(), name, opt.seed));
  map_batteries(out, w, false, opt.seed);
}

void suite_locale(Checks& out, const Workspace& w, const SuiteOptions&) {
  for (const auto& [name, sp] : w.spaces)
    guarded(out, "locale.frame", name, [&, n = name] {
      SpatialFrame fr = opens_of(sp);
      add(out, validate_frame(*fr.lat, "O(" + n + ")"));
    });
  map_batteries(out, w, true, 0);
  // Composable pairs as a pullback of d along r, probed with the cone that
  // pads an arrow with the unit at its source.
  for (const auto& ng : w.groupoids) {
    const FinGroupoid& g = ng.g;
    if (!validate_groupoid(g).valid) continue;
    guarded(out, "locale.pullback", ng.name, [&] {
      CMap dm(&g.g1(), &g.g0(), g.d_table());
      CMap rm(&g.g1(), &g.g0(), g.r_table());
      PullbackSpace p = pullback(dm, rm, ng.name + ".pairs");
      std::vector<Pt> ident(g.arrows()), pad(g.arrows());
      for (Pt h = 0; h < g.arrows(); ++h) {
        ident[h] = h;
        pad[h] = g.unit(g.d(h));
      }
      CMap to_a(&g.g1(), &g.g1(), ident);
      CMap to_b(&g.g1(), &g.g1(), pad);
      add(out, check_pullback_universal(p, dm, rm, to_a, to_b, ng.name + ".pairs"));
    });
  }
}

void suite_tensor(Checks& out, const Workspace& w, const SuiteOptions& opt) {
  struct Fam {
    const char* name;
    LatPtr lat;
  };
  const Fam fams[] = {{"c2", chain_lattice(2)},
                      {"c3", chain_lattice(3)},
                      {"c4", chain_lattice(4)},
                      {"p2", powerset_lattice(2)}};
  const Fam tgts[] = {{"c2", chain_lattice(2)}, {"c3", chain_lattice(3)}};
  for (const Fam& m : fams)
    for (const Fam& n : fams) {
      std::string obj = std::string(m.name) + "x" + n.name;
      guarded(out, "tensor.family", obj, [&] {
        TensorLattice t = enumerate_tensor(TensorContext::plain(m.lat, n.lat));
        add(out, check_tau_bimorphism(t, obj));
        for (const Fam& p : tgts) {
          std::string tobj = obj + "->" + p.name;
          guarded(out, "tensor.universal", tobj,
                  [&] { add(out, check_tensor_universal(t, p.lat, tobj)); });
        }
      });
    }
  {
    TensorLattice t =
        enumerate_tensor(TensorContext::plain(chain_lattice(3), chain_lattice(3)));
    std::string wtn;
    if (t.lat->size() != 6)
      wtn = "the chain tensor has " + std::to_string(t.lat->size()) + " elements, not 6";
    add(out, wtn.empty() ? pass_result("tensor.chain3_count", "c3xc3")
                         : fail_result("tensor.chain3_count", "c3xc3", wtn));
  }
  for (const auto& [name, q] : w.quantales) {
    if (!q.has_base()) continue;
    guarded(out, "tensor.quantale", name, [&, n = name] {
      TensorLattice t = enumerate_tensor(quantale_tensor_ctx(q), opt.max_size, opt.max_size);
      add(out, check_tau_bimorphism(t, n + ".selftensor"));
    });
  }
  // The spatial quotient identification: the inverse image of an anchored
  // carrier agrees with the tensor over the base.
  for (const auto& na : w.actions) {
    GroupoidReport rep = validate_groupoid(na.a.g());
    if (!rep.valid || !rep.open) continue;
    guarded(out, "tensor.anchored", na.name, [&] {
      try {
        QModuleData m = module_of(na.a);
        InverseImageResult inv = act_inverse_image(m, &na.a);
        add(out, inv.checks);
      } catch (const StructuralError& e) {
        add(out, skipped_result("tensor.anchored", na.name, e.what()));
      }
    });
  }
}

void suite_quantale(Checks& out, const Workspace& w, const SuiteOptions& opt) {
  for (const auto& ng : w.groupoids) {
    GroupoidReport rep = validate_groupoid(ng.g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "quantale.derived", ng.name, [&] {
      Quantale q = oquantale(ng.g, opt.side);
      Classification c = classify(q, opt.max_size);
      add(out, c.detail);
      add(out, check_inverse_law(q));
      add(out, check_multiplicative(q, opt.max_size));
      add(out, check_stability_forms(q));
      guarded(out, "support.unique", q.name(),
              [&] { add(out, check_support_unique(q)); });
      add(out, right_sided(q).checks);
      if (q.unital()) {
        add(out, check_unit_laws(q));
        add(out, check_iota_iso(q));
        add(out, partial_units(q).join_is_top);
      }
    });
  }
  for (const auto& [name, q] : w.quantales) {
    add(out, validate_quantale(q, packages_present(q)));
    if (q.has_base() && q.has_support() && q.has_upsilon())
      guarded(out, "quantale.classify", name,
              [&, &q = q] { add(out, classify(q, opt.max_size).detail); });
  }
}

void suite_groupoid(Checks& out, const Workspace& w, const SuiteOptions&) {
  for (const auto& ng : w.groupoids) {
    add(out, validate_groupoid(ng.g).checks);
    add(out, validate_groupoid(opposite_groupoid(ng.g)).checks);
  }
}

void suite_cover(Checks& out, const Workspace& w, const SuiteOptions& opt) {
  auto pipeline = [&](const FinGroupoid& base, const CoverData& cd, const std::string& object) {
    try {
      CoverAssembly ca = assemble_cover(base, cd);
      add(out, ca.checks);
      add(out, check_etale_covered(ca));
      add(out, check_phi_homomorphism(ca));
      IEQFData ieq = assemble_ieqf(ca);
      add(out, check_inverse_embedded(ieq, opt.max_size));
    } catch (const UsageError& e) {
      add(out, fail_result("cover.assembly", object, e.what()));
    } catch (const StructuralError& e) {
      add(out, fail_result("cover.assembly", object, e.what()));
    }
  };
  for (const auto& ng : w.groupoids) {
    GroupoidReport rep = validate_groupoid(ng.g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "cover.germ", ng.name, [&] {
      GermCoverResult gc = germ_cover(ng.g);
      add(out, gc.coverable);
      if (gc.cover) pipeline(ng.g, *gc.cover, ng.name);
    });
  }
  for (const auto& nc : w.covers) {
    const NamedGroupoid* base = w.groupoid(nc.base);
    add(out, validate_groupoid(nc.data.ghat).checks);
    guarded(out, "cover.germ", nc.name, [&] { pipeline(base->g, nc.data, nc.name); });
  }
}

void suite_actions(Checks& out, const Workspace& w, const SuiteOptions&) {
  for (const auto& na : w.actions) {
    add(out, validate_action(na.a));
    GroupoidReport rep = validate_groupoid(na.a.g());
    if (!rep.valid || !rep.open) continue;
    guarded(out, "actions.module", na.name, [&] {
      QModuleData m = module_of(na.a);
      add(out, m.checks);
    });
    guarded(out, "actions.cover", na.name, [&] {
      GermCoverResult gc = germ_cover(na.a.g());
      if (!gc.cover) return;
      CoverAssembly ca = assemble_cover(na.a.g(), *gc.cover);
      IEQFData ieq = assemble_ieqf(ca);
      try {
        GAction xhat = lift_action(na.a, *gc.cover);
        add(out, check_descent_vs_o_locale(xhat, ca, ieq));
      } catch (const UsageError& e) {
        add(out, skipped_result("actions.lift", na.name, e.what()));
      }
      add(out, invariants_and_orbit(na.a, *gc.cover).checks);
    });
  }
  // Declared covers pair with the actions living over their covering
  // groupoid; these carry the descent negatives.
  for (const auto& nc : w.covers) {
    const NamedGroupoid* base = w.groupoid(nc.base);
    GroupoidReport rep = validate_groupoid(base->g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "actions.cover", nc.name, [&] {
      try {
        CoverAssembly ca = assemble_cover(base->g, nc.data);
        IEQFData ieq = assemble_ieqf(ca);
        for (const auto& na : w.actions)
          if (na.groupoid == nc.ghat)
            add(out, check_descent_vs_o_locale(na.a, ca, ieq));
      } catch (const UsageError& e) {
        add(out, skipped_result("actions.cover", nc.name, e.what()));
      }
    });
  }
  for (const auto& nm : w.modules) {
    const NamedAction* na = w.action(nm.of);
    GroupoidReport rep = validate_groupoid(na->a.g());
    if (!rep.valid || !rep.open) {
      add(out, skipped_result("actions.module", nm.name, "the groupoid of " + nm.of +
                                                             " is not a valid open groupoid"));
      continue;
    }
    guarded(out, "actions.module", nm.name, [&] { add(out, module_of(na->a).checks); });
  }
}

void sheaf_battery(Checks& out, const HilbertModule& h) {
  add(out, validate_hilbert(h, hilbert_packages_present(h)));
  add(out, inner_product_formula(h).checks);
  add(out, hilbert_sections(h).checks);
  add(out, sheaf_anchor_checks(h));
}

void suite_hilbert(Checks& out, const Workspace& w, const SuiteOptions& opt) {
  for (const auto& ng : w.groupoids) {
    GroupoidReport rep = validate_groupoid(ng.g);
    if (!rep.valid || !rep.etale) continue;
    guarded(out, "hilbert.self", ng.name, [&] {
      Quantale q = oquantale(ng.g, opt.side);
      sheaf_battery(out, self_module(q));
    });
    std::vector<GAction> base_sheaves, cover_sheaves;
    guarded(out, "hilbert.sheaves", ng.name, [&] {
      GermCoverResult gc = germ_cover(ng.g);
      if (!gc.cover) return;
      CoverAssembly ca = assemble_cover(ng.g, *gc.cover);
      IEQFData ieq = assemble_ieqf(ca);
      for (const auto& na : w.actions) {
        if (na.groupoid != ng.name) continue;
        try {
          sheaf_battery(out, sheaf_of(na.a));
        } catch (const UsageError& e) {
          add(out, skipped_result("hilbert.sheaf", na.name, e.what()));
        }
        try {
          GAction xhat = lift_action(na.a, *gc.cover);
          add(out, thm_descent_iff_inner(xhat, ca, ieq));
          cover_sheaves.push_back(xhat);
          base_sheaves.push_back(na.a);
        } catch (const UsageError& e) {
          add(out, skipped_result("hilbert.lift", na.name, e.what()));
        }
      }
      if (!base_sheaves.empty())
        guarded(out, "hilbert.correspondence", ng.name,
                [&] { add(out, sheaf_correspondence(cover_sheaves, base_sheaves, ca, ieq)); });
    });
  }
  for (const auto& nc : w.covers) {
    const NamedGroupoid* base = w.groupoid(nc.base);
    GroupoidReport rep = validate_groupoid(base->g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "hilbert.cover", nc.name, [&] {
      try {
        CoverAssembly ca = assemble_cover(base->g, nc.data);
        IEQFData ieq = assemble_ieqf(ca);
        for (const auto& na : w.actions)
          if (na.groupoid == nc.ghat) add(out, thm_descent_iff_inner(na.a, ca, ieq));
      } catch (const UsageError& e) {
        add(out, skipped_result("hilbert.cover", nc.name, e.what()));
      }
    });
  }
}

std::size_t pair_count(const Bilocale& a, const Bilocale& b) {
  std::size_t n = 0;
  for (Pt v = 0; v < a.x().points(); ++v)
    for (Pt w = 0; w < b.x().points(); ++w)
      if (a.right.p(v) == b.left.p(w)) ++n;
  return n;
}

void suite_bilocale(Checks& out, const Workspace& w, const SuiteOptions&) {
  // Keeps every composite pair space inside the enumeration budget.
  constexpr std::size_t compose_cap = 10;
  std::vector<std::pair<std::string, Bilocale>> pool;
  for (const auto& ng : w.groupoids) {
    GroupoidReport rep = validate_groupoid(ng.g);
    if (!rep.valid) continue;
    pool.emplace_back(ng.name + ".self", self_bilocale_of(ng.g));
  }
  for (const auto& nb : w.bilocales) pool.emplace_back(nb.name, nb.b);
  for (const auto& [name, b] : pool) add(out, validate_bilocale(b));

  auto composable = [](const Bilocale& a, const Bilocale& b) {
    FinGroupoid mid = a.middle();
    return same_structure(mid.g0(), b.left.g().g0()) &&
           same_structure(mid.g1(), b.left.g().g1()) &&
           mid.d_table() == b.left.g().d_table() && mid.r_table() == b.left.g().r_table() &&
           mid.m_table() == b.left.g().m_table();
  };
  for (const auto& [an, a] : pool)
    for (const auto& [bn, b] : pool) {
      if (!composable(a, b)) continue;
      std::string obj = an + "*" + bn;
      if (pair_count(a, b) > compose_cap) {
        add(out, skipped_result("bilocale.compose", obj,
                                "the pair space exceeds the compose cap"));
        continue;
      }
      guarded(out, "bilocale.compose", obj, [&, &a = a, &b = b] {
        add(out, tensor_compose(a, b).checks);
        GermCoverResult gc = germ_cover(b.left.g());
        if (gc.cover) add(out, check_tensor_agreement(a, b, *gc.cover));
      });
    }
  for (const auto& [an, a] : pool)
    for (const auto& [bn, b] : pool) {
      if (!composable(a, b) || pair_count(a, b) > compose_cap) continue;
      for (const auto& [cn, c] : pool) {
        if (!composable(b, c) || pair_count(b, c) > compose_cap) continue;
        guarded(out, "bilocale.associativity", an + "*" + bn + "*" + cn,
                [&, &a = a, &b = b, &c = c] { add(out, associativity_smoke(a, b, c)); });
      }
    }
  // The self bilocale of each covered quantale carries the adjoint pair.
  for (const auto& ng : w.groupoids) {
    GroupoidReport rep = validate_groupoid(ng.g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "bilocale.adjoint", ng.name, [&] {
      GermCoverResult gc = germ_cover(ng.g);
      if (!gc.cover) return;
      CoverAssembly ca = assemble_cover(ng.g, *gc.cover);
      IEQFData ieq = assemble_ieqf(ca);
      add(out, check_adjointness(self_bilocale(ieq), ieq));
    });
  }
  for (const auto& nc : w.covers) {
    const NamedGroupoid* base = w.groupoid(nc.base);
    GroupoidReport rep = validate_groupoid(base->g);
    if (!rep.valid || !rep.open) continue;
    guarded(out, "bilocale.adjoint", nc.name, [&] {
      try {
        CoverAssembly ca = assemble_cover(base->g, nc.data);
        IEQFData ieq = assemble_ieqf(ca);
        add(out, check_adjointness(self_bilocale(ieq), ieq));
      } catch (const UsageError& e) {
        add(out, skipped_result("bilocale.adjoint", nc.name, e.what()));
      }
    });
  }
}

void finalize(SuiteReport& r, const SuiteOptions& opt) {
  auto key = [](const CheckResult& c) {
    return std::tie(c.name, c.object, c.verdict, c.witness);
  };
  std::sort(r.checks.begin(), r.checks.end(),
            [&](const CheckResult& a, const CheckResult& b) { return key(a) < key(b); });
  r.checks.erase(std::unique(r.checks.begin(), r.checks.end(),
                             [&](const CheckResult& a, const CheckResult& b) {
                               return key(a) == key(b);
                             }),
                 r.checks.end());
  if (!opt.only.empty())
    std::erase_if(r.checks, [&](const CheckResult& c) {
      return c.name.find(opt.only) == std::string::npos &&
             c.object.find(opt.only) == std::string::npos;
    });
  r.exit_code = 0;
  for (const CheckResult& c : r.checks) {
    if (c.verdict == Verdict::incident) {
      r.exit_code = 2;
      return;
    }
    if (c.verdict == Verdict::fail) r.exit_code = 1;
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"suplat", "tensor",  "locale",  "quantale",
                                                 "groupoid", "cover", "actions", "hilbert",
                                                 "bilocale", "all"};
  return names;
}

SuiteReport run_suite(const Workspace& w, const std::string& suite, const SuiteOptions& opt) {
  SuiteReport r;
  r.suite = suite;
  if (suite == "suplat")
    suite_suplat(r.checks, w, opt);
  else if (suite == "tensor")
    suite_tensor(r.checks, w, opt);
  else if (suite == "locale")
    suite_locale(r.checks, w, opt);
  else if (suite == "quantale")
    suite_quantale(r.checks, w, opt);
  else if (suite == "groupoid")
    suite_groupoid(r.checks, w, opt);
  else if (suite == "cover")
    suite_cover(r.checks, w, opt);
  else if (suite == "actions")
    suite_actions(r.checks, w, opt);
  else if (suite == "hilbert")
    suite_hilbert(r.checks, w, opt);
  else if (suite == "bilocale")
    suite_bilocale(r.checks, w, opt);
  else if (suite == "all") {
    for (const std::string& s : suite_names()) {
      if (s == "all") continue;
      SuiteReport part = run_suite(w, s, opt);
      add(r.checks, std::move(part.checks));
      r.exit_code = std::max(r.exit_code, part.exit_code);
    }
    // checks were finalized per suite; the filter and order already hold
    int code = r.exit_code;
    finalize(r, opt);
    r.exit_code = code;
    return r;
  } else {
    throw UsageError("unknown suite " + suite + "; expected one of suplat, tensor, locale, "
                     "quantale, groupoid, cover, actions, hilbert, bilocale, all");
  }
  finalize(r, opt);
  return r;
}

}  // namespace qf
