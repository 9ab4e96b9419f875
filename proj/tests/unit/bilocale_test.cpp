#include "doctest.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "qforge/bilocale.hpp"

using namespace qf;

namespace {

const CheckResult* find_check(const std::vector<CheckResult>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.name == name) return &c;
  return nullptr;
}

bool all_green(const std::vector<CheckResult>& cs) {
  for (const auto& c : cs)
    if (c.verdict == Verdict::fail || c.verdict == Verdict::incident) return false;
  return true;
}

FinSpace disc(int n, const std::string& name) {
  std::vector<std::string> pts;
  for (int i = 0; i < n; ++i) pts.push_back(name + std::to_string(i));
  return FinSpace(name, pts, {});
}

GAction swap_action(const FinSpace& x, const std::string& name) {
  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  return GAction(name, g, x, {0, 0}, {0, 1, 1, 0});
}

GAction trivial_action(const FinGroupoid& one, const FinSpace& x, const std::string& name) {
  std::vector<Pt> p(x.points(), 0), act(x.points());
  std::iota(act.begin(), act.end(), Pt(0));
  return GAction(name, one, x, std::move(p), std::move(act));
}

std::size_t member_count(const ComposeResult& cr) {
  return std::size_t(std::count(cr.member.begin(), cr.member.end(), char(1)));
}

}  // namespace

TEST_CASE("two sided regular translations validate") {
  for (const FinGroupoid& g :
       {pair_groupoid(2, "pair2"), indiscrete_group_groupoid(2, "ind_z2"),
        unit_groupoid(disc(1, "pt"), "upt")}) {
    Bilocale b = self_bilocale_of(g);
    auto cs = validate_bilocale(b);
    CHECK(all_green(cs));
    for (const char* name : {"bilocale.q_invariant", "bilocale.p_invariant",
                             "bilocale.middle_assoc"})
      CHECK(find_check(cs, name) != nullptr);
  }
}

TEST_CASE("a rerouted cell breaks the anchor invariance") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  Bilocale b = self_bilocale_of(g);
  std::vector<Pt> act = b.left.act_table();
  const std::size_t n = g.arrows();
  bool done = false;
  for (std::size_t a = 0; a < n && !done; ++a)
    for (std::size_t v = 0; v < n && !done; ++v) {
      if (g.d(Pt(a)) != g.r(Pt(v))) continue;
      Pt cur = act[a * n + v];
      for (std::size_t w = 0; w < n; ++w)
        if (g.d(Pt(w)) != g.d(cur)) {
          act[a * n + v] = Pt(w);
          done = true;
          break;
        }
    }
  REQUIRE(done);
  GAction left2("bad", g, b.left.x(), b.left.p_table(), act);
  Bilocale bad = make_bilocale("bad.self", left2, b.right);
  auto cs = validate_bilocale(bad);
  const CheckResult* q = find_check(cs, "bilocale.q_invariant");
  REQUIRE(q != nullptr);
  CHECK(q->verdict == Verdict::fail);
  CHECK(!q->witness.empty());
}

TEST_CASE("the carrier gate rejects mismatched actions") {
  FinSpace x = disc(2, "x"), y = disc(3, "y");
  FinGroupoid uop = opposite_groupoid(unit_groupoid(disc(1, "pt"), "upt"));
  CHECK_THROWS_AS(make_bilocale("mixed", swap_action(x, "xl"), trivial_action(uop, y, "yr")),
                  StructuralError);
}

TEST_CASE("the arrow bilocale composed with itself is the arrow lattice") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  Bilocale b = self_bilocale_of(g);
  ComposeResult cr = tensor_compose(b, b);
  for (const char* name : {"bilocale.composite_valid", "bilocale.subframe_closed",
                           "bilocale.coequalizer_spatial"}) {
    const CheckResult* c = find_check(cr.checks, name);
    REQUIRE(c != nullptr);
    CHECK(c->ok());
  }
  const FinSpace& w = cr.composite.x();
  CHECK(w.points() == 4);
  CHECK(w.discrete());
  CHECK(cr.tensor.elts.size() == 256);
  CHECK(member_count(cr) == 16);

  // the classes transport the regular two-sided translations through m
  std::vector<Pt> carr(cr.reps.size());
  std::map<Pt, Pt> arrow_class;
  for (std::size_t c = 0; c < cr.reps.size(); ++c) {
    auto [a, bb] = cr.reps[c];
    carr[c] = g.m(a, bb);
    arrow_class[carr[c]] = Pt(c);
  }
  CHECK(arrow_class.size() == 4);
  for (std::size_t ar = 0; ar < g.arrows(); ++ar)
    for (std::size_t c = 0; c < carr.size(); ++c) {
      bool comp = cr.composite.left.composable(Pt(ar), Pt(c));
      CHECK(comp == (g.d(Pt(ar)) == g.r(carr[c])));
      if (comp) CHECK(carr[cr.composite.left.apply(Pt(ar), Pt(c))] == g.m(Pt(ar), carr[c]));
      bool rcomp = cr.composite.right.composable(Pt(ar), Pt(c));
      CHECK(rcomp == (g.r(Pt(ar)) == g.d(carr[c])));
      if (rcomp) CHECK(carr[cr.composite.right.apply(Pt(ar), Pt(c))] == g.m(carr[c], Pt(ar)));
    }
}

TEST_CASE("the indiscrete group composes to the indiscrete carrier") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  Bilocale b = self_bilocale_of(g);
  ComposeResult cr = tensor_compose(b, b);
  CHECK(all_green(cr.checks));
  CHECK(cr.composite.x().points() == 2);
  CHECK(!cr.composite.x().t0());
  CHECK(member_count(cr) == 2);
}

TEST_CASE("a one arrow middle composes to the product") {
  FinSpace x = disc(2, "x"), y = disc(3, "y");
  FinGroupoid upt = unit_groupoid(disc(1, "pt"), "upt");
  FinGroupoid uop = opposite_groupoid(upt);
  Bilocale bx = make_bilocale("xside", swap_action(x, "xl"), trivial_action(uop, x, "xr"));
  Bilocale by = make_bilocale("yside", trivial_action(upt, y, "yl"), trivial_action(uop, y, "yr"));
  ComposeResult cr = tensor_compose(bx, by);
  CHECK(all_green(cr.checks));
  CHECK(cr.composite.x().points() == 6);
  CHECK(member_count(cr) == cr.tensor.elts.size());
}

TEST_CASE("the middle gate rejects a mismatched chain") {
  Bilocale b2 = self_bilocale_of(pair_groupoid(2, "pair2"));
  Bilocale bi = self_bilocale_of(indiscrete_group_groupoid(2, "ind_z2"));
  CHECK_THROWS_AS(tensor_compose(b2, bi), StructuralError);
  CHECK_THROWS_AS(associativity_smoke(b2, bi, bi), StructuralError);
}

TEST_CASE("the subframe over the middle agrees with the one over its cover") {
  for (const FinGroupoid& g :
       {indiscrete_group_groupoid(2, "ind_z2"), pair_groupoid(2, "pair2")}) {
    auto gc = germ_cover(g);
    REQUIRE(gc.cover.has_value());
    Bilocale b = self_bilocale_of(g);
    CheckResult c = check_tensor_agreement(b, b, *gc.cover);
    CHECK(c.ok());
  }
}

TEST_CASE("composition is associative on the regular chains") {
  Bilocale b2 = self_bilocale_of(pair_groupoid(2, "pair2"));
  CHECK(associativity_smoke(b2, b2, b2).ok());
  Bilocale bi = self_bilocale_of(indiscrete_group_groupoid(2, "ind_z2"));
  CHECK(associativity_smoke(bi, bi, bi).ok());

  // two-point carriers keep the outer composites at eight product points;
  // anything larger pushes the tensor past the lattice cap
  FinSpace x = disc(2, "x"), y = disc(2, "y"), z = disc(2, "z");
  FinGroupoid upt = unit_groupoid(disc(1, "pt"), "upt");
  FinGroupoid uop = opposite_groupoid(upt);
  FinGroupoid z2 = cyclic_group_groupoid(2, "z2");
  Bilocale bx = make_bilocale("xside", swap_action(x, "xl"), trivial_action(uop, x, "xr"));
  Bilocale by = make_bilocale("yside", trivial_action(upt, y, "yl"), trivial_action(uop, y, "yr"));
  Bilocale bz = make_bilocale(
      "zside", trivial_action(upt, z, "zl"),
      GAction("zr", opposite_groupoid(z2), z, {0, 0}, {0, 1, 1, 0}));
  CHECK(associativity_smoke(bx, by, bz).ok());
}

TEST_CASE("a broken right translation surfaces in association") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  Bilocale b = self_bilocale_of(g);
  std::vector<Pt> act = b.right.act_table();
  const std::size_t n = g.arrows();
  bool done = false;
  for (std::size_t k = 0; k < n && !done; ++k)
    for (std::size_t v = 0; v < n && !done; ++v) {
      if (g.r(Pt(k)) != g.d(Pt(v))) continue;
      Pt cur = act[k * n + v];
      for (std::size_t w = 0; w < n; ++w)
        if (g.d(Pt(w)) != g.d(cur)) {
          act[k * n + v] = Pt(w);
          done = true;
          break;
        }
    }
  REQUIRE(done);
  GAction right2("badr", b.right.g(), b.right.x(), b.right.p_table(), act);
  Bilocale bad = make_bilocale("bad.self", b.left, right2);
  CheckResult c = associativity_smoke(b, bad, b);
  CHECK(c.verdict == Verdict::fail);
  CHECK(!c.witness.empty());
}

TEST_CASE("the composite outer action embeds over the cover") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca = assemble_cover(g, *gc.cover);
  IEQFData ieq = assemble_ieqf(ca);
  Bilocale b = self_bilocale_of(g);
  ComposeResult cr = tensor_compose(b, b);
  GAction lifted = lift_action(cr.composite.left, *gc.cover);
  QModuleData m = module_of(lifted);
  OLocaleResult ol = check_O_locale(m, ieq);
  CHECK(ol.verdict.ok());
}
