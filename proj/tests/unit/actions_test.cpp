#include <doctest.h>

#include <string>
#include <utility>
#include <vector>

#include "qforge/actions.hpp"

using namespace qf;

namespace {

const CheckResult* find_check(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

bool all_green(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) return false;
  return true;
}

std::string first_red(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs)
    if (r.verdict == Verdict::fail || r.verdict == Verdict::incident)
      return r.name + ": " + r.witness;
  return "";
}

Elt by_mask(const std::vector<PtMask>& masks, PtMask m) {
  for (Elt e = 0; e < Elt(masks.size()); ++e)
    if (masks[e] == m) return e;
  REQUIRE(false);
  return no_elt;
}

// The pair groupoid acting on its own unit space: p the identity and an
// arrow (i,j) sending j to i.
GAction pair2_on_disc2() {
  FinGroupoid g = pair_groupoid(2, "pair2");
  FinSpace x("disc2", {"0", "1"}, {});
  std::vector<Pt> p = {0, 1};
  std::vector<Pt> act(g.arrows() * 2, no_pt);
  for (Pt ar = 0; ar < g.arrows(); ++ar)
    for (Pt v = 0; v < 2; ++v)
      if (g.d(ar) == v) act[ar * 2 + v] = g.r(ar);
  return GAction("pair2_on_disc2", std::move(g), std::move(x), std::move(p), std::move(act));
}

// Z/2 swapping a discrete two-point carrier.
GAction z2_swap() {
  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  FinSpace x("disc2", {"a", "b"}, {});
  return GAction("z2_swap", std::move(g), std::move(x), {0, 0}, {0, 1, 1, 0});
}

// The regular action of the indiscrete Z/2 on its own arrow space.
GAction ind_z2_regular() {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  FinSpace x = g.g1();
  std::vector<Pt> act = {0, 1, 1, 0};
  return GAction("reg(ind_z2)", std::move(g), std::move(x), {0, 0}, std::move(act));
}

// A cover action with no descent: the carrier is discrete, so the base
// translation cannot stay continuous over the indiscrete arrows below.
GAction discrete_translation(const FinGroupoid& ghat, const std::vector<Pt>& j1) {
  FinSpace x("X2", {"x0", "x1"}, {});
  std::vector<Pt> act(ghat.arrows() * 2, no_pt);
  for (Pt ar = 0; ar < ghat.arrows(); ++ar)
    for (Pt v = 0; v < 2; ++v) act[ar * 2 + v] = j1[ar] == 0 ? v : Pt(1 - v);
  return GAction("disc_translation", ghat, std::move(x), {0, 0}, std::move(act));
}

CoverData identity_cover(const FinGroupoid& g) {
  std::vector<Pt> j0(g.units()), j1(g.arrows());
  for (Pt p = 0; p < g.units(); ++p) j0[p] = p;
  for (Pt a = 0; a < g.arrows(); ++a) j1[a] = a;
  return CoverData{g, std::move(j0), std::move(j1)};
}

}  // namespace

TEST_CASE("the shape validation rejects malformed action tables") {
  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  FinSpace x("disc2", {"a", "b"}, {});
  CHECK_THROWS_AS(GAction("bad", g, x, {0}, {0, 1, 1, 0}), StructuralError);
  CHECK_THROWS_AS(GAction("bad", g, x, {0, 0}, {0, 1, 1}), StructuralError);
  CHECK_THROWS_AS(GAction("bad", g, x, {0, 0}, {0, no_pt, 1, 0}), StructuralError);

  FinGroupoid p2 = pair_groupoid(2, "pair2");
  std::vector<Pt> full(p2.arrows() * 2, 0);
  CHECK_THROWS_AS(GAction("bad", p2, x, {0, 1}, full), StructuralError);

  GAction a = z2_swap();
  CHECK(a.apply(1, 0) == 1);
  GAction pd = pair2_on_disc2();
  CHECK_THROWS_AS(pd.apply(*pd.g().g1().point_by_name("(0,1)"), 0), UsageError);
}

TEST_CASE("the pair groupoid action on its units validates") {
  GAction a = pair2_on_disc2();
  auto rs = validate_action(a);
  INFO(first_red(rs));
  CHECK(all_green(rs));
}

TEST_CASE("the swap action validates and a broken unit row is caught") {
  GAction a = z2_swap();
  auto rs = validate_action(a);
  INFO(first_red(rs));
  CHECK(all_green(rs));

  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  FinSpace x("disc2", {"a", "b"}, {});
  GAction bad("z2_swap.broken_unit", g, x, {0, 0}, {1, 0, 1, 0});
  auto bs = validate_action(bad);
  const CheckResult* un = find_check(bs, "action.unitarity");
  REQUIRE(un != nullptr);
  CHECK(un->verdict == Verdict::fail);
  CHECK(un->witness.find("a") != std::string::npos);
  CHECK(find_check(bs, "action.associativity")->verdict == Verdict::fail);
}

TEST_CASE("the open-set module of the swap action translates opens") {
  GAction a = z2_swap();
  QModuleData m = module_of(a);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));

  SpatialFrame sf1 = opens_of(a.g().g1());
  Elt ge = by_mask(sf1.mask, 0b01);  // {e}
  Elt gg = by_mask(sf1.mask, 0b10);  // {g1}
  Elt xa = by_mask(m.xmask, 0b01);
  Elt xb = by_mask(m.xmask, 0b10);
  CHECK(m.mul(gg, xa) == xb);
  CHECK(m.mul(gg, xb) == xa);
  CHECK(m.mul(ge, xa) == xa);
  CHECK(m.res(m.q.base().top(), xa) == xa);
  CHECK(m.res(m.q.base().bottom(), xa) == m.xlat->bottom());
}

TEST_CASE("the pair groupoid module sends the full arrow set over any point to everything") {
  GAction a = pair2_on_disc2();
  QModuleData m = module_of(a);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));
  Elt x0 = by_mask(m.xmask, 0b01);
  CHECK(m.mul(m.q.lat().top(), x0) == m.xlat->top());
}

TEST_CASE("the unit groupoid acts by restriction") {
  FinSpace s("sierp", {"c", "o"}, {{0, 1}});
  FinGroupoid g = unit_groupoid(s, "unit_sierp");
  std::vector<Pt> act(g.arrows() * 2, no_pt);
  for (Pt p = 0; p < 2; ++p) act[p * 2 + p] = p;
  GAction a("unit_sierp.trivial", g, s, {0, 1}, std::move(act));
  auto rs = validate_action(a);
  INFO(first_red(rs));
  CHECK(all_green(rs));

  QModuleData m = module_of(a);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));
  for (Elt A = 0; A < Elt(m.q.size()); ++A)
    for (Elt V = 0; V < Elt(m.xlat->size()); ++V) {
      Elt meet = m.xlat->meet(by_mask(m.xmask, opens_of(g.g1()).mask[A]), V);
      CHECK(m.mul(A, V) == meet);
    }
}

TEST_CASE("the right adjoint of the swap module matches the partial-unit formula") {
  GAction a = z2_swap();
  QModuleData m = module_of(a);
  InverseImageResult inv = act_inverse_image(m, &a);
  INFO(first_red(inv.checks));
  CHECK(all_green(inv.checks));

  SpatialFrame sf1 = opens_of(a.g().g1());
  Elt ge = by_mask(sf1.mask, 0b01);
  Elt gg = by_mask(sf1.mask, 0b10);
  Elt xa = by_mask(m.xmask, 0b01);
  Elt xb = by_mask(m.xmask, 0b10);
  std::vector<std::pair<Elt, Elt>> prs = {{ge, xa}, {gg, xb}};
  CHECK(inv.alpha[xa] == inv.tensor.id_of(BiIdeal::from_pairs(inv.tensor.ctx, prs)));
  CHECK(inv.alpha[m.xlat->bottom()] == inv.tensor.lat->bottom());
  CHECK(inv.alpha[m.xlat->top()] == inv.tensor.lat->top());
}

TEST_CASE("the balanced tensor of the pair module is the frame of composable pairs") {
  GAction a = pair2_on_disc2();
  QModuleData m = module_of(a);
  InverseImageResult inv = act_inverse_image(m, &a);
  INFO(first_red(inv.checks));
  CHECK(all_green(inv.checks));
  CHECK(find_check(inv.checks, "actmod.tensor_spatial")->verdict == Verdict::pass);
  CHECK(inv.tensor.lat->size() == 16);  // four discrete composable pairs
}

TEST_CASE("the regular module of the indiscrete group skips the unit-bound routes") {
  GAction a = ind_z2_regular();
  QModuleData m = module_of(a);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));
  CHECK(find_check(m.checks, "module.unital")->verdict == Verdict::skipped);

  InverseImageResult inv = act_inverse_image(m, &a);
  INFO(first_red(inv.checks));
  CHECK(all_green(inv.checks));
  CHECK(find_check(inv.checks, "actmod.etale_formula")->verdict == Verdict::skipped);
  CHECK(find_check(inv.checks, "actmod.tensor_spatial")->verdict == Verdict::pass);
  CHECK(inv.tensor.lat->size() == 2);  // the composable-pairs space is indiscrete
}

TEST_CASE("lifting the regular action along the germ cover keeps it valid") {
  GAction a = ind_z2_regular();
  auto gc = germ_cover(a.g());
  REQUIRE(gc.cover.has_value());
  GAction lifted = lift_action(a, *gc.cover);
  auto rs = validate_action(lifted);
  INFO(first_red(rs));
  CHECK(all_green(rs));
  CHECK(lifted.g().arrows() == 2);
  CHECK(validate_groupoid(lifted.g()).etale);

  CHECK_THROWS_AS(lift_action(a, identity_cover(pair_groupoid(2, "pair2"))), UsageError);
}

TEST_CASE("the lifted regular action descends back to itself") {
  GAction a = ind_z2_regular();
  auto gc = germ_cover(a.g());
  REQUIRE(gc.cover.has_value());
  CoverData cd = *gc.cover;
  CoverAssembly ca = assemble_cover(a.g(), cd);
  GAction lifted = lift_action(a, cd);

  DescentResult dr = check_descent(lifted, ca);
  CHECK(dr.verdict.verdict == Verdict::pass);
  REQUIRE(dr.descended.has_value());
  CHECK(dr.descended->p_table() == a.p_table());
  CHECK(dr.descended->act_table() == a.act_table());
  INFO(first_red(dr.checks));
  CHECK(all_green(dr.checks));
}

TEST_CASE("a discrete carrier over the indiscrete base refuses to descend") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverData cd = *gc.cover;
  CoverAssembly ca = assemble_cover(g, cd);
  GAction xhat = discrete_translation(ca.ghat, ca.j1);
  INFO(first_red(validate_action(xhat)));
  CHECK(all_green(validate_action(xhat)));

  DescentResult dr = check_descent(xhat, ca);
  CHECK(dr.verdict.verdict == Verdict::fail);
  CHECK(!dr.descended.has_value());
  CHECK(dr.verdict.witness.find("not continuous") != std::string::npos);
  CHECK(find_check(dr.checks, "actions.descended_valid")->verdict == Verdict::skipped);
}

TEST_CASE("the descending action factors through the embedded tensor") {
  GAction a = ind_z2_regular();
  auto gc = germ_cover(a.g());
  CoverData cd = *gc.cover;
  CoverAssembly ca = assemble_cover(a.g(), cd);
  IEQFData ieq = assemble_ieqf(ca);
  GAction lifted = lift_action(a, cd);

  OLocaleResult ol = check_O_locale(module_of(lifted), ieq);
  INFO(ol.verdict.witness);
  CHECK(ol.verdict.verdict == Verdict::pass);
  INFO(first_red(ol.checks));
  CHECK(all_green(ol.checks));
  for (Elt e : ol.beta_star) CHECK(e != no_elt);
}

TEST_CASE("the non-descending action lands outside the embedded tensor") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  CoverData cd = *gc.cover;
  CoverAssembly ca = assemble_cover(g, cd);
  IEQFData ieq = assemble_ieqf(ca);
  GAction xhat = discrete_translation(ca.ghat, ca.j1);
  QModuleData m = module_of(xhat);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));

  InverseImageResult inv = act_inverse_image(m, &xhat);
  INFO(first_red(inv.checks));
  CHECK(all_green(inv.checks));
  SpatialFrame sfh = opens_of(ca.ghat.g1());
  Pt ge = no_pt, gg = no_pt;  // germ over e, germ over g1
  for (Pt ar = 0; ar < ca.ghat.arrows(); ++ar) (ca.j1[ar] == 0 ? ge : gg) = ar;
  Elt se = by_mask(sfh.mask, PtMask(1) << ge);
  Elt sg = by_mask(sfh.mask, PtMask(1) << gg);
  Elt x0 = by_mask(m.xmask, 0b01);
  Elt x1 = by_mask(m.xmask, 0b10);
  std::vector<std::pair<Elt, Elt>> prs = {{se, x0}, {sg, x1}};
  CHECK(inv.alpha[x0] == inv.tensor.id_of(BiIdeal::from_pairs(inv.tensor.ctx, prs)));

  OLocaleResult ol = check_O_locale(m, ieq);
  CHECK(ol.verdict.verdict == Verdict::fail);
  CHECK(ol.verdict.witness.find("outside the embedded tensor") != std::string::npos);
  CHECK(ol.beta_star[x0] == no_elt);
  CHECK(find_check(ol.checks, "olocale.beta_frame")->verdict == Verdict::skipped);
}

TEST_CASE("descent and the tensor factorization agree on both fixtures") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  CoverData cd = *gc.cover;
  CoverAssembly ca = assemble_cover(g, cd);
  IEQFData ieq = assemble_ieqf(ca);

  GAction a = ind_z2_regular();
  GAction lifted = lift_action(a, cd);
  auto pos = check_descent_vs_o_locale(lifted, ca, ieq);
  CHECK(find_check(pos, "actions.descent_iff_o_locale")->verdict == Verdict::pass);
  CHECK(find_check(pos, "actions.j_dominated")->verdict == Verdict::pass);
  INFO(first_red(pos));
  CHECK(all_green(pos));

  GAction xhat = discrete_translation(ca.ghat, ca.j1);
  auto neg = check_descent_vs_o_locale(xhat, ca, ieq);
  CHECK(find_check(neg, "actions.descent")->verdict == Verdict::fail);
  CHECK(find_check(neg, "actions.o_locale")->verdict == Verdict::fail);
  CHECK(find_check(neg, "actions.descent_iff_o_locale")->verdict == Verdict::pass);
  CHECK(find_check(neg, "actions.j_dominated")->verdict == Verdict::skipped);
}

TEST_CASE("the swap orbit collapses the carrier to a single class") {
  GAction a = z2_swap();
  OrbitResult orb = invariants_and_orbit(a, identity_cover(a.g()));
  INFO(first_red(orb.checks));
  CHECK(all_green(orb.checks));
  REQUIRE(orb.invariant.size() == 2);
  CHECK(orb.invariant[0] == module_of(a).xlat->bottom());
  CHECK(orb.orbit->size() == 2);
}

TEST_CASE("the pair groupoid orbit over the germ cover is a single class") {
  GAction a = pair2_on_disc2();
  auto gc = germ_cover(a.g());
  REQUIRE(gc.cover.has_value());
  OrbitResult orb = invariants_and_orbit(a, *gc.cover);
  INFO(first_red(orb.checks));
  CHECK(all_green(orb.checks));
  CHECK(orb.invariant.size() == 2);
}

TEST_CASE("every open is invariant under the unit groupoid") {
  FinSpace s("sierp", {"c", "o"}, {{0, 1}});
  FinGroupoid g = unit_groupoid(s, "unit_sierp");
  std::vector<Pt> act(g.arrows() * 2, no_pt);
  for (Pt p = 0; p < 2; ++p) act[p * 2 + p] = p;
  GAction a("unit_sierp.trivial", g, s, {0, 1}, std::move(act));
  OrbitResult orb = invariants_and_orbit(a, identity_cover(g));
  INFO(first_red(orb.checks));
  CHECK(all_green(orb.checks));
  CHECK(orb.invariant.size() == 3);
  CHECK(orb.orbit->size() == 3);
}

TEST_CASE("the identity and the swap are equivariant self-maps of the swap action") {
  GAction a = z2_swap();
  CoverData cd = identity_cover(a.g());
  auto id_rs = check_equivariant({0, 1}, a, a, cd);
  INFO(first_red(id_rs));
  CHECK(all_green(id_rs));
  auto sw_rs = check_equivariant({1, 0}, a, a, cd);
  INFO(first_red(sw_rs));
  CHECK(all_green(sw_rs));
}

TEST_CASE("a constant map fails all three equivariance routes coherently") {
  GAction a = z2_swap();
  CoverData cd = identity_cover(a.g());
  auto rs = check_equivariant({0, 0}, a, a, cd);
  CHECK(find_check(rs, "equiv.anchor")->verdict == Verdict::pass);
  CHECK(find_check(rs, "equiv.pointwise")->verdict == Verdict::fail);
  CHECK(find_check(rs, "equiv.lifted")->verdict == Verdict::fail);
  CHECK(find_check(rs, "equiv.module_hom")->verdict == Verdict::fail);
  CHECK(find_check(rs, "equiv.agreement")->verdict == Verdict::pass);
}

TEST_CASE("the covering quantale acting on the base opens is its own factorization") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, *gc.cover);
  IEQFData ieq = assemble_ieqf(ca);

  QModuleData m = module_from_tables("og(ind_z2)", ieq.oghat, ieq.og.lat_ptr(), ieq.lact);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));
  for (Elt b = 0; b < Elt(m.q.base().size()); ++b)
    for (Elt x = 0; x < Elt(ieq.og.size()); ++x) CHECK(m.res(b, x) == ieq.og.lres(b, x));

  OLocaleResult ol = check_O_locale(m, ieq);
  INFO(ol.verdict.witness);
  CHECK(ol.verdict.verdict == Verdict::pass);
  INFO(first_red(ol.checks));
  CHECK(all_green(ol.checks));
}

TEST_CASE("the covering quantale of the pair groupoid is an O-locale over itself") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, *gc.cover);
  IEQFData ieq = assemble_ieqf(ca);

  QModuleData m = module_from_tables("og(pair2)", ieq.oghat, ieq.og.lat_ptr(), ieq.lact);
  INFO(first_red(m.checks));
  CHECK(all_green(m.checks));

  OLocaleResult ol = check_O_locale(m, ieq);
  INFO(ol.verdict.witness);
  CHECK(ol.verdict.verdict == Verdict::pass);
  INFO(first_red(ol.checks));
  CHECK(all_green(ol.checks));
}
