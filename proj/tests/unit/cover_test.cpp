#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "qforge/cover.hpp"

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

Elt og_elt(const CoverAssembly& ca, PtMask m) {
  for (Elt e = 0; e < Elt(ca.og_mask.size()); ++e)
    if (ca.og_mask[e] == m) return e;
  REQUIRE(false);
  return no_elt;
}

Elt oghat_elt(const CoverAssembly& ca, PtMask m) {
  for (Elt e = 0; e < Elt(ca.oghat_mask.size()); ++e)
    if (ca.oghat_mask[e] == m) return e;
  REQUIRE(false);
  return no_elt;
}

// The pair groupoid over the Sierpinski space: open but not etale, and two
// of its arrows lie in no local bisection.
FinGroupoid pair_sierp() {
  FinSpace g0("sierp", {"c", "o"}, {{0, 1}});
  std::vector<std::pair<Pt, Pt>> leq;
  for (Pt a = 0; a < 4; ++a)
    for (Pt b = 0; b < 4; ++b)
      if ((a >> 1) <= (b >> 1) && (a & 1) <= (b & 1)) leq.emplace_back(a, b);
  FinSpace g1("pair_sierp.G1", {"(c,c)", "(c,o)", "(o,c)", "(o,o)"}, leq);
  std::vector<Pt> d = {0, 1, 0, 1};
  std::vector<Pt> r = {0, 0, 1, 1};
  std::vector<Pt> i = {0, 2, 1, 3};
  std::vector<Pt> u = {0, 3};
  std::vector<Pt> m(16, no_pt);
  for (Pt a = 0; a < 4; ++a)
    for (Pt b = 0; b < 4; ++b)
      if ((a & 1) == (b >> 1)) m[a * 4 + b] = Pt(((a >> 1) << 1) | (b & 1));
  return FinGroupoid("pair_sierp", std::move(g0), std::move(g1), std::move(d), std::move(r),
                     std::move(m), std::move(i), std::move(u));
}

}  // namespace

TEST_CASE("pair2 bisections enumerate the partial matchings") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto bs = bisections(g);
  CHECK(bs.size() == 7);  // empty, 4 singletons, identity, swap

  Bisection ub = unit_bisection(g);
  CHECK(std::count(bs.begin(), bs.end(), ub) == 1);

  // s . s^-1 is the unit section restricted to the image of r.
  for (const auto& s : bs) {
    Bisection round = compose_bisections(g, s, invert_bisection(g, s));
    for (Pt p = 0; p < g.units(); ++p) {
      if (round.arrow[p] == no_pt) continue;
      CHECK(round.arrow[p] == g.unit(p));
    }
  }
}

TEST_CASE("germ cover of pair2 reproduces the groupoid") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CHECK(gc.coverable.ok());

  const FinGroupoid& ghat = gc.cover->ghat;
  CHECK(ghat.arrows() == 4);
  CHECK(ghat.units() == 2);
  CHECK(ghat.g1().discrete());
  CHECK(ghat.g1().point_by_name("(0,1)@1").has_value());
  CHECK(ghat.g1().point_by_name("(1,0)@0").has_value());

  auto rep = validate_groupoid(ghat);
  CHECK(rep.valid);
  CHECK(rep.etale);

  // The value map hits every arrow exactly once here.
  std::vector<char> hit(g.arrows(), 0);
  for (Pt x : gc.cover->j1) {
    CHECK(!hit[x]);
    hit[x] = 1;
  }
}

TEST_CASE("germ cover of ind_z2 is the discrete two-element group") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  const FinGroupoid& ghat = gc.cover->ghat;
  CHECK(ghat.arrows() == 2);
  CHECK(ghat.g1().discrete());
  CHECK(ghat.g1().t0());
  CHECK(ghat.g1().point_by_name("e@*") == 0);
  CHECK(ghat.g1().point_by_name("g1@*") == 1);
  CHECK(validate_groupoid(ghat).etale);
}

TEST_CASE("assembling the pair2 germ cover yields a frame isomorphism") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));

  INFO(first_red(ca.checks));
  CHECK(all_green(ca.checks));
  const CheckResult* agree = find_check(ca.checks, "cover.j_formula_agreement");
  REQUIRE(agree != nullptr);
  CHECK(agree->verdict == Verdict::pass);

  // j is a bijection here, so the adjoint inverts it on both sides.
  for (Elt a = 0; a < Elt(ca.og.size()); ++a) CHECK(ca.jstar[ca.j(a)] == a);
  for (Elt y = 0; y < Elt(ca.oghat.size()); ++y) CHECK(ca.j(ca.jstar[y]) == y);

  auto ec = check_etale_covered(ca);
  INFO(first_red(ec));
  CHECK(all_green(ec));

  auto ph = check_phi_homomorphism(ca);
  INFO(first_red(ph));
  CHECK(all_green(ph));
}

TEST_CASE("assembling the ind_z2 germ cover matches the frozen adjoint") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  INFO(first_red(ca.checks));
  CHECK(all_green(ca.checks));

  const SupLattice& lo = ca.og.lat();
  const SupLattice& lq = ca.oghat.lat();
  CHECK(ca.j(lo.bottom()) == lq.bottom());
  CHECK(ca.j(lo.top()) == lq.top());

  // The adjoint collapses both singletons to bottom.
  CHECK(ca.jstar[oghat_elt(ca, 0b01)] == lo.bottom());
  CHECK(ca.jstar[oghat_elt(ca, 0b10)] == lo.bottom());
  CHECK(ca.jstar[lq.bottom()] == lo.bottom());
  CHECK(ca.jstar[lq.top()] == lo.top());

  auto ec = check_etale_covered(ca);
  INFO(first_red(ec));
  CHECK(all_green(ec));
}

TEST_CASE("cover action translates along bisections") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));

  Pt a01 = *g.g1().point_by_name("(0,1)");
  Pt a10 = *g.g1().point_by_name("(1,0)");
  Pt a00 = *g.g1().point_by_name("(0,0)");
  Pt g01 = *ca.ghat.g1().point_by_name("(0,1)@1");

  Elt u = oghat_elt(ca, PtMask(1) << g01);
  Elt q = og_elt(ca, PtMask(1) << a10);
  CHECK(bisection_action(ca, u, q) == og_elt(ca, PtMask(1) << a00));
  CHECK(bisection_action(ca, u, og_elt(ca, PtMask(1) << a01)) == ca.og.lat().bottom());

  // Acting by any open agrees with the join of its partial-unit pieces.
  auto pu = partial_units(ca.oghat);
  for (Elt s = 0; s < Elt(ca.oghat.size()); ++s)
    for (Elt x = 0; x < Elt(ca.og.size()); ++x) {
      Elt direct = cover_action(ca, s, x);
      Elt joined = ca.og.lat().bottom();
      for (Elt v : pu.elements)
        if (ca.oghat.lat().leq(v, s))
          joined = ca.og.lat().join(joined, bisection_action(ca, v, x));
      CHECK(direct == joined);
    }

  CHECK_THROWS_AS(bisection_action(ca, ca.oghat.lat().top(), q), UsageError);
}

TEST_CASE("inverse embedding battery passes on the pair2 cover") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  IEQFData d = assemble_ieqf(ca);
  auto rs = check_inverse_embedded(d);

  INFO(first_red(rs));
  CHECK(all_green(rs));

  const CheckResult* eq = find_check(rs, "ieq.item_d_equality");
  REQUIRE(eq != nullptr);
  CHECK(eq->witness == "equality holds at every element");

  const CheckResult* kills = find_check(rs, "ieq.lemma_jstar_kills_units");
  REQUIRE(kills != nullptr);
  CHECK(kills->verdict == Verdict::skipped);
  CHECK(kills->witness.find("unital") != std::string::npos);

  const CheckResult* note = find_check(rs, "ieq.transported_product_note");
  REQUIRE(note != nullptr);
  CHECK(note->witness.find("coincides") != std::string::npos);
}

TEST_CASE("inverse embedding battery exercises the unitless adjoint on ind_z2") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  IEQFData d = assemble_ieqf(ca);
  CHECK(!d.og.unital());

  auto rs = check_inverse_embedded(d);
  INFO(first_red(rs));
  CHECK(all_green(rs));

  const CheckResult* kills = find_check(rs, "ieq.lemma_jstar_kills_units");
  REQUIRE(kills != nullptr);
  CHECK(kills->verdict == Verdict::pass);
}

TEST_CASE("right action is the involutive transport of the left one") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  IEQFData d = assemble_ieqf(ca);

  Pt a01 = *g.g1().point_by_name("(0,1)");
  Pt a00 = *g.g1().point_by_name("(0,0)");
  Pt g10 = *ca.ghat.g1().point_by_name("(1,0)@0");

  Elt q = og_elt(ca, PtMask(1) << a01);
  Elt s = oghat_elt(ca, PtMask(1) << g10);
  CHECK(d.ract(q, s) == og_elt(ca, PtMask(1) << a00));
}

TEST_CASE("a unit groupoid is its own germ cover") {
  FinSpace s("sierp", {"c", "o"}, {{0, 1}});
  FinGroupoid g = unit_groupoid(std::move(s), "unit_sierp");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CHECK(gc.cover->ghat.arrows() == 2);
  CHECK(gc.cover->ghat.g1().leq(0, 1));

  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  INFO(first_red(ca.checks));
  CHECK(all_green(ca.checks));
  auto ec = check_etale_covered(ca);
  INFO(first_red(ec));
  CHECK(all_green(ec));

  IEQFData d = assemble_ieqf(ca);
  auto rs = check_inverse_embedded(d);
  INFO(first_red(rs));
  CHECK(all_green(rs));
  const CheckResult* kills = find_check(rs, "ieq.lemma_jstar_kills_units");
  REQUIRE(kills != nullptr);
  CHECK(kills->verdict == Verdict::skipped);
}

TEST_CASE("the pair groupoid over the Sierpinski space is not coverable") {
  FinGroupoid g = pair_sierp();
  auto rep = validate_groupoid(g);
  CHECK(rep.valid);
  CHECK(rep.open);
  CHECK(!rep.etale);

  auto gc = germ_cover(g);
  CHECK(!gc.cover.has_value());
  CHECK(gc.coverable.verdict == Verdict::fail);
  CHECK(gc.coverable.witness.find("(c,o)") != std::string::npos);
}

TEST_CASE("collapsing the arrow map breaks the functor and the embedding") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverData cd = std::move(*gc.cover);

  Pt g01 = *cd.ghat.g1().point_by_name("(0,1)@1");
  cd.j1[g01] = *g.g1().point_by_name("(0,0)");

  CoverAssembly ca = assemble_cover(g, std::move(cd));
  const CheckResult* mono = find_check(ca.checks, "cover.j_frame_mono");
  REQUIRE(mono != nullptr);
  CHECK(mono->verdict == Verdict::fail);
  const CheckResult* inv = find_check(ca.checks, "cover.j_involution");
  REQUIRE(inv != nullptr);
  CHECK(inv->verdict == Verdict::fail);

  auto ec = check_etale_covered(ca);
  CHECK(find_check(ec, "cover.functor")->verdict == Verdict::fail);
  CHECK(find_check(ec, "cover.j1_epi")->verdict == Verdict::fail);
  CHECK(find_check(ec, "cover.ghat_etale")->verdict == Verdict::pass);

  auto ph = check_phi_homomorphism(ca);
  CHECK(find_check(ph, "cover.phi_bisection")->verdict == Verdict::fail);

  IEQFData d = assemble_ieqf(ca);
  auto rs = check_inverse_embedded(d);
  CHECK(find_check(rs, "ieq.item_a_involution")->verdict == Verdict::fail);
  CHECK(!all_green(rs));
}

TEST_CASE("an embedding that misses the top breaks the right-sided inclusion") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  auto gc = germ_cover(g);
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  IEQFData d = assemble_ieqf(ca);

  std::vector<Elt> jt = d.j.table();
  jt[d.og.lat().top()] = oghat_elt(ca, 0b01);
  IEQFData bad{d.og, d.oghat, SupMap(d.og.lat_ptr(), d.oghat.lat_ptr(), std::move(jt)),
               d.lact};

  auto rs = check_inverse_embedded(bad);
  CHECK(find_check(rs, "ieq.j_frame_mono")->verdict == Verdict::fail);
  CHECK(find_check(rs, "ieq.item_e_rs_into_image")->verdict == Verdict::fail);

  // With the definition already broken, lemma violations are plain failures.
  bool lemma_failed = false;
  for (const auto& r : rs) {
    CHECK(r.verdict != Verdict::incident);
    if (r.name.rfind("ieq.lemma_", 0) == 0 && r.verdict == Verdict::fail) lemma_failed = true;
  }
  CHECK(lemma_failed);
}

TEST_CASE("bisection transport is a monoid homomorphism on the cyclic cover") {
  FinGroupoid g = cyclic_group_groupoid(3, "z3");
  auto gc = germ_cover(g);
  REQUIRE(gc.cover.has_value());
  CoverAssembly ca = assemble_cover(g, std::move(*gc.cover));
  CHECK(bisections(ca.ghat).size() == 4);  // empty plus the three group sections

  auto ph = check_phi_homomorphism(ca);
  INFO(first_red(ph));
  CHECK(all_green(ph));

  IEQFData d = assemble_ieqf(ca);
  auto rs = check_inverse_embedded(d);
  INFO(first_red(rs));
  CHECK(all_green(rs));
}

TEST_CASE("bisection enumeration is guarded on large unit spaces") {
  std::vector<std::string> names;
  for (int i = 0; i < 17; ++i) names.push_back("p" + std::to_string(i));
  FinSpace s("d17", names, {});
  FinGroupoid g = unit_groupoid(std::move(s), "unit_d17");
  CHECK_THROWS_AS(bisections(g), CapacityError);
}
