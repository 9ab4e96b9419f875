#include <doctest.h>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "qforge/hilbert.hpp"

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

// Z/2 swapping a discrete two-point carrier.
GAction z2_swap() {
  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  FinSpace x("disc2", {"a", "b"}, {});
  return GAction("z2_swap", std::move(g), std::move(x), {0, 0}, {0, 1, 1, 0});
}

// Z/3 rotating a discrete three-point carrier.
GAction z3_rotation() {
  FinGroupoid g = cyclic_group_groupoid(3, "z3");
  FinSpace x("disc3", {"x0", "x1", "x2"}, {});
  std::vector<Pt> act(9);
  for (Pt ar = 0; ar < 3; ++ar)
    for (Pt v = 0; v < 3; ++v) act[ar * 3 + v] = Pt((ar + v) % 3);
  return GAction("z3_rotation", std::move(g), std::move(x), {0, 0, 0}, std::move(act));
}

// The regular action of the indiscrete Z/2 on its own arrow space.
GAction ind_z2_regular() {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  FinSpace x = g.g1();
  return GAction("reg(ind_z2)", std::move(g), std::move(x), {0, 0}, {0, 1, 1, 0});
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

// Every arrow acting as the identity on a named discrete carrier.
GAction identity_carrier(const FinGroupoid& g, std::string name,
                         std::vector<std::string> pts) {
  const Pt k = Pt(pts.size());
  FinSpace x(name + ".carrier", std::move(pts), {});
  std::vector<Pt> p(k, 0);
  std::vector<Pt> act(g.arrows() * k);
  for (Pt ar = 0; ar < g.arrows(); ++ar)
    for (Pt v = 0; v < k; ++v) act[ar * k + v] = v;
  return GAction(std::move(name), g, std::move(x), std::move(p), std::move(act));
}

struct CoverSetup {
  CoverAssembly ca;
  IEQFData ieq;
};

CoverSetup ind_z2_setup() {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  GermCoverResult gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca = assemble_cover(g, *gc.cover);
  IEQFData ieq = assemble_ieqf(ca);
  return {std::move(ca), std::move(ieq)};
}

}  // namespace

TEST_CASE("the self module of the group quantale satisfies every package") {
  Quantale q = oquantale(cyclic_group_groupoid(2, "z2"));
  HilbertModule h = self_module(q);
  REQUIRE(h.has_support());

  auto present = hilbert_packages_present(h);
  CHECK(present.size() == 5);
  auto rs = validate_hilbert(h, present);
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  CHECK(find_check(rs, "hilbert.non_degenerate") != nullptr);
  CHECK(find_check(rs, "hilbert.complete") != nullptr);
  CHECK(find_check(rs, "hilbert.stable_forced") != nullptr);
  CHECK(find_check(rs, "hilbert.support_unit_meet") != nullptr);

  SpatialFrame arr = opens_of(cyclic_group_groupoid(2, "z2").g1());
  Elt le = by_mask(arr.mask, 1u << 0), lg = by_mask(arr.mask, 1u << 1);
  CHECK(h.inner(lg, lg) == le);
  CHECK(h.inner(le, lg) == lg);
  CHECK(h.spp(lg) == le);
}

TEST_CASE("the self-module inner product matches the partial-unit formula") {
  HilbertModule h = self_module(oquantale(cyclic_group_groupoid(2, "z2")));
  InnerFormulaResult fr = inner_product_formula(h);
  CHECK_MESSAGE(all_green(fr.checks), first_red(fr.checks));
  CHECK(fr.table == h.ip);
}

TEST_CASE("the sections of the self module are the partial units") {
  HilbertModule h = self_module(oquantale(cyclic_group_groupoid(2, "z2")));
  SectionsResult sr = hilbert_sections(h);
  CHECK_MESSAGE(all_green(sr.checks), first_red(sr.checks));

  SpatialFrame arr = opens_of(cyclic_group_groupoid(2, "z2").g1());
  std::vector<Elt> expect = {by_mask(arr.mask, 0), by_mask(arr.mask, 1u << 0),
                             by_mask(arr.mask, 1u << 1)};
  std::sort(expect.begin(), expect.end());
  CHECK(sr.hilbert == expect);
  CHECK(sr.local == expect);
  const CheckResult* bs = find_check(sr.checks, "hilbert.basis_sections");
  REQUIRE(bs != nullptr);
  CHECK(bs->verdict == Verdict::skipped);

  // a stored basis takes the direct route through completeness and sections
  h.basis = std::vector<Elt>{by_mask(arr.mask, 1u << 0)};
  auto rs = validate_hilbert(h, {HilbertPackage::complete});
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  SectionsResult sr2 = hilbert_sections(h);
  bs = find_check(sr2.checks, "hilbert.basis_sections");
  REQUIRE(bs != nullptr);
  CHECK(bs->ok());
}

TEST_CASE("a one-element module is complete and stable") {
  Quantale q = oquantale(cyclic_group_groupoid(2, "z2"));
  LatPtr x = make_lattice({"0"}, {});
  HilbertModule h{"one", q, x, std::vector<Elt>(q.size(), 0), {q.lat().bottom()},
                  {q.lat().bottom()}, std::nullopt};
  auto rs = validate_hilbert(h, hilbert_packages_present(h));
  CHECK_MESSAGE(all_green(rs), first_red(rs));
}

TEST_CASE("a broken involution symmetry is caught and taints the formula") {
  HilbertModule h = self_module(oquantale(cyclic_group_groupoid(2, "z2")));
  SpatialFrame arr = opens_of(cyclic_group_groupoid(2, "z2").g1());
  Elt le = by_mask(arr.mask, 1u << 0), lg = by_mask(arr.mask, 1u << 1);
  Elt top = by_mask(arr.mask, 3u);
  h.ip[std::size_t(le) * h.x->size() + lg] = top;

  auto rs = validate_hilbert(h, {HilbertPackage::pre_hilbert});
  const CheckResult* sym = find_check(rs, "hilbert.ip_symmetry");
  REQUIRE(sym != nullptr);
  CHECK(sym->verdict == Verdict::fail);
  CHECK(!sym->witness.empty());

  InnerFormulaResult fr = inner_product_formula(h);
  const CheckResult* f = find_check(fr.checks, "hilbert.ip_formula");
  REQUIRE(f != nullptr);
  CHECK(f->verdict == Verdict::fail);
}

TEST_CASE("a degenerate inner product is caught") {
  HilbertModule h = self_module(oquantale(cyclic_group_groupoid(2, "z2")));
  std::fill(h.ip.begin(), h.ip.end(), h.q.lat().bottom());
  auto rs = validate_hilbert(h, {HilbertPackage::hilbert});
  const CheckResult* nd = find_check(rs, "hilbert.non_degenerate");
  REQUIRE(nd != nullptr);
  CHECK(nd->verdict == Verdict::fail);
  CHECK(nd->witness.find("coincide") != std::string::npos);
}

TEST_CASE("missing package data is a usage error") {
  HilbertModule h = self_module(oquantale(cyclic_group_groupoid(2, "z2")));
  h.sppx.clear();
  CHECK_THROWS_AS(validate_hilbert(h, {HilbertPackage::supported}), UsageError);
  CHECK_THROWS_AS(hilbert_sections(h), UsageError);
  CHECK_THROWS_AS(inner_product_formula(h), UsageError);

  // past 16 carrier elements the completeness search needs a stored basis
  HilbertModule big = self_module(oquantale(pair_groupoid(3, "pair3")));
  CHECK(big.x->size() == 512);
  CHECK_THROWS_AS(validate_hilbert(big, {HilbertPackage::complete}), UsageError);
  auto rs = validate_hilbert(big, {HilbertPackage::pre_hilbert});
  const CheckResult* mj = find_check(rs, "hilbert.module_joins");
  REQUIRE(mj != nullptr);
  CHECK(mj->verdict == Verdict::skipped);
}

TEST_CASE("the self module over a non-unital quantale skips the unit law") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  Quantale q = oquantale(g);
  REQUIRE(!q.unital());
  HilbertModule h = self_module(q);
  CHECK(!h.has_support());

  auto present = hilbert_packages_present(h);
  CHECK(std::find(present.begin(), present.end(), HilbertPackage::supported) == present.end());
  auto rs = validate_hilbert(h, present);
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  const CheckResult* mu = find_check(rs, "hilbert.module_unital");
  REQUIRE(mu != nullptr);
  CHECK(mu->verdict == Verdict::skipped);
}

TEST_CASE("the sheaf of the swap action carries the group-translation inner product") {
  GAction a = z2_swap();
  HilbertModule h = sheaf_of(a);
  auto rs = validate_hilbert(h, hilbert_packages_present(h));
  CHECK_MESSAGE(all_green(rs), first_red(rs));

  SpatialFrame car = opens_of(a.x());
  SpatialFrame arr = opens_of(a.g().g1());
  Elt la = by_mask(car.mask, 1u << 0), lb = by_mask(car.mask, 1u << 1);
  Elt le = by_mask(arr.mask, 1u << 0), lg = by_mask(arr.mask, 1u << 1);
  CHECK(h.inner(la, lb) == lg);
  CHECK(h.inner(la, la) == le);
  CHECK(h.spp(la) == le);
  CHECK(h.spp(by_mask(car.mask, 0)) == by_mask(arr.mask, 0));

  InnerFormulaResult fr = inner_product_formula(h);
  CHECK_MESSAGE(all_green(fr.checks), first_red(fr.checks));
  SectionsResult sr = hilbert_sections(h);
  CHECK_MESSAGE(all_green(sr.checks), first_red(sr.checks));
  std::vector<Elt> expect = {by_mask(car.mask, 0), la, lb};
  std::sort(expect.begin(), expect.end());
  CHECK(sr.local == expect);
}

TEST_CASE("the sheaf of the rotation action validates over Z/3") {
  GAction a = z3_rotation();
  HilbertModule h = sheaf_of(a);
  auto rs = validate_hilbert(h, hilbert_packages_present(h));
  CHECK_MESSAGE(all_green(rs), first_red(rs));

  SpatialFrame car = opens_of(a.x());
  SpatialFrame arr = opens_of(a.g().g1());
  CHECK(h.inner(by_mask(car.mask, 1u << 0), by_mask(car.mask, 1u << 1)) ==
        by_mask(arr.mask, 1u << 2));
}

TEST_CASE("the sheaf construction rejects non-etale groupoids and bad anchors") {
  CHECK_THROWS_AS(sheaf_of(ind_z2_regular()), UsageError);

  FinGroupoid g = cyclic_group_groupoid(2, "z2");
  FinSpace ind2("ind2", {"u", "v"}, {{0, 1}, {1, 0}});
  GAction flat("flat", g, std::move(ind2), {0, 0}, {0, 1, 0, 1});
  CHECK_THROWS_AS(sheaf_of(flat), UsageError);
}

TEST_CASE("descent and the embedded inner product agree on the germ cover") {
  CoverSetup s = ind_z2_setup();

  GAction pos = identity_carrier(s.ca.ghat, "triv_pt", {"p"});
  auto rs = thm_descent_iff_inner(pos, s.ca, s.ieq);
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  const CheckResult* d = find_check(rs, "actions.descent");
  const CheckResult* o = find_check(rs, "hilbert.o_sheaf");
  REQUIRE(d != nullptr);
  REQUIRE(o != nullptr);
  CHECK(d->ok());
  CHECK(o->ok());

  GAction neg = discrete_translation(s.ca.ghat, s.ca.j1);
  auto rs2 = thm_descent_iff_inner(neg, s.ca, s.ieq);
  d = find_check(rs2, "actions.descent");
  o = find_check(rs2, "hilbert.o_sheaf");
  const CheckResult* iff = find_check(rs2, "hilbert.descent_iff_inner");
  REQUIRE(d != nullptr);
  REQUIRE(o != nullptr);
  REQUIRE(iff != nullptr);
  CHECK(d->verdict == Verdict::fail);
  CHECK(o->verdict == Verdict::fail);
  CHECK(o->witness.find("outside the embedded quantale") != std::string::npos);
  CHECK(iff->ok());

  // the gate is structural, so a quantale of a different shape is needed
  HilbertModule other = self_module(oquantale(pair_groupoid(2, "pair2")));
  CHECK_THROWS_AS(check_O_sheaf(other, s.ieq), UsageError);
}

TEST_CASE("adjointness holds on the self bilocale of the covering quantale") {
  CoverSetup s = ind_z2_setup();
  BilocaleSheafData d = self_bilocale(s.ieq);
  auto rs = check_adjointness(d, s.ieq);
  CHECK_MESSAGE(all_green(rs), first_red(rs));

  FinGroupoid p2 = pair_groupoid(2, "pair2");
  GermCoverResult gc = germ_cover(p2);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca2 = assemble_cover(p2, *gc.cover);
  IEQFData ieq2 = assemble_ieqf(ca2);
  auto rs2 = check_adjointness(self_bilocale(ieq2), ieq2);
  CHECK_MESSAGE(all_green(rs2), first_red(rs2));
}

TEST_CASE("a mutated involution breaks adjointness with a witness") {
  CoverSetup s = ind_z2_setup();
  const Quantale& og = s.ieq.og;
  const std::size_t n = og.size();
  std::vector<Elt> mult(n * n), inv(n);
  for (Elt a = 0; a < Elt(n); ++a) {
    inv[a] = Elt(n - 1 - a);  // swaps bottom and top: no longer the identity
    for (Elt b = 0; b < Elt(n); ++b) mult[std::size_t(a) * n + b] = og.mul(a, b);
  }
  Quantale og2(og.name(), og.lat_ptr(), std::move(mult), std::move(inv),
               og.unital() ? og.unit() : no_elt);
  IEQFData bad{std::move(og2), s.ieq.oghat, s.ieq.j, s.ieq.lact};

  auto rs = check_adjointness(self_bilocale(s.ieq), bad);
  const CheckResult* adj = find_check(rs, "hilbert.adjointness");
  REQUIRE(adj != nullptr);
  CHECK(adj->verdict == Verdict::fail);
  CHECK(!adj->witness.empty());
}

TEST_CASE("sheaf homomorphism conditions separate the support breakers") {
  HilbertModule hx = sheaf_of(z2_swap());
  const std::size_t nx = hx.x->size();
  std::vector<Elt> id(nx);
  for (Elt v = 0; v < Elt(nx); ++v) id[v] = v;
  auto rs = check_sheaf_hom(id, hx, hx);
  CHECK_MESSAGE(all_green(rs), first_red(rs));

  std::vector<Elt> low(nx, hx.x->bottom());
  auto rs2 = check_sheaf_hom(low, hx, hx);
  const CheckResult* sup = find_check(rs2, "hilbert.hom_sup");
  const CheckResult* spp = find_check(rs2, "hilbert.hom_support");
  const CheckResult* sec = find_check(rs2, "hilbert.hom_sections");
  REQUIRE(sup != nullptr);
  REQUIRE(spp != nullptr);
  REQUIRE(sec != nullptr);
  CHECK(sup->ok());
  CHECK(spp->verdict == Verdict::fail);
  CHECK(sec->ok());

  HilbertModule hy = self_module(oquantale(pair_groupoid(2, "pair2")));
  CHECK_THROWS_AS(check_sheaf_hom(id, hx, hy), UsageError);
}

TEST_CASE("the spectrum anchor of a sheaf is a local homeomorphism") {
  auto rs = sheaf_anchor_checks(self_module(oquantale(cyclic_group_groupoid(2, "z2"))));
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  auto rs2 = sheaf_anchor_checks(sheaf_of(z2_swap()));
  CHECK_MESSAGE(all_green(rs2), first_red(rs2));

  HilbertModule h = sheaf_of(z2_swap());
  SpatialFrame car = opens_of(FinSpace("disc2", {"a", "b"}, {}));
  h.sppx[by_mask(car.mask, 1u << 0)] = h.q.lat().bottom();
  auto rs3 = sheaf_anchor_checks(h);
  const CheckResult* r = find_check(rs3, "hilbert.anchor_etale");
  REQUIRE(r != nullptr);
  CHECK(r->verdict == Verdict::fail);
  CHECK(r->witness.find("not a point of the unit downset") != std::string::npos);
}

TEST_CASE("the sheaf correspondence holds instance by instance over the germ cover") {
  CoverSetup s = ind_z2_setup();
  std::vector<GAction> cover_sheaves;
  cover_sheaves.push_back(identity_carrier(s.ca.ghat, "triv_pt", {"p"}));
  cover_sheaves.push_back(identity_carrier(s.ca.ghat, "idA", {"a0", "a1"}));
  cover_sheaves.push_back(identity_carrier(s.ca.ghat, "idB", {"b1", "b0"}));
  cover_sheaves.push_back(discrete_translation(s.ca.ghat, s.ca.j1));

  FinGroupoid base = indiscrete_group_groupoid(2, "ind_z2");
  std::vector<GAction> base_sheaves;
  base_sheaves.push_back(identity_carrier(base, "triv_pt", {"p"}));
  base_sheaves.push_back(identity_carrier(base, "idA", {"a0", "a1"}));

  auto rs = sheaf_correspondence(cover_sheaves, base_sheaves, s.ca, s.ieq);
  CHECK_MESSAGE(all_green(rs), first_red(rs));
  CHECK(find_check(rs, "hilbert.corr_iff") != nullptr);
  CHECK(find_check(rs, "hilbert.corr_lift_valid") != nullptr);
  CHECK(find_check(rs, "hilbert.corr_roundtrip") != nullptr);
  CHECK(find_check(rs, "hilbert.corr_bijection") != nullptr);

  std::vector<GAction> big = {
      identity_carrier(s.ca.ghat, "wide", {"c0", "c1", "c2", "c3"})};
  CHECK_THROWS_AS(sheaf_correspondence(big, {}, s.ca, s.ieq), CapacityError);
  // the groupoid gate is structural, so two units are needed to differ
  FinGroupoid ug = unit_groupoid(FinSpace("disc2", {"0", "1"}, {}), "unit_disc2");
  std::vector<GAction> wrong;
  wrong.emplace_back("wrong", ug, ug.g0(), std::vector<Pt>{0, 1},
                     std::vector<Pt>{0, no_pt, no_pt, 1});
  CHECK_THROWS_AS(sheaf_correspondence(wrong, {}, s.ca, s.ieq), UsageError);
}
