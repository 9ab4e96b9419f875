#include <doctest.h>

#include "qforge/groupoid.hpp"

using namespace qf;

namespace {

FinSpace sierp() { return FinSpace("sierp", {"c", "o"}, {{0, 1}}); }

bool all_ok(const GroupoidReport& rep) {
  for (const CheckResult& r : rep.checks)
    if (!r.ok()) return false;
  return true;
}

// Z/2 on a Sierpinski carrier: the multiplication cannot be continuous for
// either choice of which arrow is the identity.
FinGroupoid sierp_group(bool identity_closed) {
  FinSpace g0("pt", {"*"}, {});
  FinSpace g1("sz2.G1", {"c", "o"}, {{0, 1}});
  Pt e = identity_closed ? 0 : 1;
  std::vector<Pt> m(4);
  for (Pt a = 0; a < 2; ++a)
    for (Pt b = 0; b < 2; ++b) m[a * 2 + b] = (a == e) ? b : Pt(1 - b);
  return FinGroupoid("sierp_z2", std::move(g0), std::move(g1), {0, 0}, {0, 0}, std::move(m),
                     {0, 1}, {e});
}

}  // namespace

TEST_CASE("discrete pair groupoid is open and etale") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  GroupoidReport rep = validate_groupoid(g);
  CHECK(rep.valid);
  CHECK(rep.open);
  CHECK(rep.etale);
  CHECK(all_ok(rep));
}

TEST_CASE("indiscrete group is open but not etale") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  GroupoidReport rep = validate_groupoid(g);
  CHECK(rep.valid);
  CHECK(rep.open);
  CHECK_FALSE(rep.etale);
  CHECK(all_ok(rep));  // the classification itself is informative, not a failure
}

TEST_CASE("group on a Sierpinski carrier fails continuity of m") {
  for (bool closed_identity : {true, false}) {
    GroupoidReport rep = validate_groupoid(sierp_group(closed_identity));
    CHECK_FALSE(rep.valid);
    bool m_failed = false;
    for (const CheckResult& r : rep.checks)
      if (r.name == "groupoid.continuity.m" && !r.ok() && !r.witness.empty()) m_failed = true;
    CHECK(m_failed);
  }
}

TEST_CASE("unit groupoids are etale and multiply by intersection") {
  FinGroupoid g = unit_groupoid(sierp(), "unit_sierp");
  GroupoidReport rep = validate_groupoid(g);
  CHECK(rep.valid);
  CHECK(rep.etale);
  Quantale q = oquantale(g);
  CHECK(q.size() == 3);  // chain of three opens
  for (Elt x = 0; x < q.size(); ++x) {
    CHECK(q.star(x) == x);
    for (Elt y = 0; y < q.size(); ++y) CHECK(q.mul(x, y) == q.lat().meet(x, y));
  }
  CHECK(q.unital());
  CHECK(q.unit() == q.lat().top());
}

TEST_CASE("pair groupoid quantale composes arrows") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  Quantale q = oquantale(g);
  CHECK(q.size() == 16);
  // arrows are named (i,j); find the opens {(0,1)}, {(1,0)}, {(0,0)}
  auto single = [&](const std::string& nm) {
    for (Elt a = 0; a < q.size(); ++a)
      if (q.lat().name(a) == "{" + nm + "}") return a;
    FAIL("missing singleton ", nm);
    return no_elt;
  };
  Elt a01 = single("(0,1)"), a10 = single("(1,0)"), a00 = single("(0,0)");
  CHECK(q.mul(a01, a10) == a00);
  CHECK(q.star(a01) == a10);
  CHECK(q.unital());
  CHECK(q.lat().name(q.unit()) == "{(0,0),(1,1)}");
  Classification c = classify(q);
  INFO(c.failing_groupoid, " / ", c.failing_iqf);
  CHECK(c.groupoid_quantale);
  CHECK(c.inverse_quantal_frame);
}

TEST_CASE("indiscrete group quantale has no unit and is not an iqf") {
  FinGroupoid g = indiscrete_group_groupoid(2, "ind_z2");
  Quantale q = oquantale(g);
  CHECK(q.size() == 2);
  CHECK(q.mul(1, 1) == 1);  // 1 . 1 = 1
  CHECK_FALSE(q.unital());
  RightSidedResult rs = right_sided(q);
  CHECK(rs.elements == std::vector<Elt>{0, 1});  // bottom and top
  Classification c = classify(q);
  INFO(c.failing_groupoid);
  CHECK(c.groupoid_quantale);
  CHECK_FALSE(c.inverse_quantal_frame);
  CHECK(c.failing_iqf == "no designated unit");
  CHECK_FALSE(c.note.empty());  // the abstract unit (the top) is reported
}

TEST_CASE("cyclic group quantales classify as groupoid quantales") {
  for (std::size_t n : {2u, 3u, 4u}) {
    FinGroupoid g = cyclic_group_groupoid(n, "z" + std::to_string(n));
    GroupoidReport rep = validate_groupoid(g);
    CHECK(rep.valid);
    CHECK(rep.etale);
    Quantale q = oquantale(g);
    Classification c = classify(q);
    INFO("z", n, ": ", c.failing_groupoid, " / ", c.failing_iqf);
    CHECK(c.groupoid_quantale);
    CHECK(c.inverse_quantal_frame);
  }
}

TEST_CASE("oquantale refuses non-open and invalid groupoids") {
  CHECK_THROWS_AS(oquantale(sierp_group(true)), UsageError);
}

TEST_CASE("the opposite groupoid swaps ends and reverses products") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  FinGroupoid op = opposite_groupoid(g);
  GroupoidReport rep = validate_groupoid(op);
  CHECK(rep.valid);
  CHECK(rep.etale);
  for (Pt a = 0; a < g.arrows(); ++a) {
    CHECK(op.d(a) == g.r(a));
    CHECK(op.r(a) == g.d(a));
  }
  for (Pt a = 0; a < g.arrows(); ++a)
    for (Pt b = 0; b < g.arrows(); ++b)
      if (op.composable(a, b)) CHECK(op.m(a, b) == g.m(b, a));
}

TEST_CASE("source-side convention matches the opposite groupoid") {
  FinGroupoid g = pair_groupoid(2, "pair2");
  Quantale qr = oquantale(g, Side::range);
  Quantale qd = oquantale(g, Side::source);
  // same carrier; the product reverses and the restrictions flip sides
  for (Elt a = 0; a < qr.size(); ++a) {
    CHECK(qd.star(a) == qr.star(a));
    for (Elt b = 0; b < qr.size(); ++b) CHECK(qd.mul(a, b) == qr.mul(b, a));
  }
  for (Elt u = 0; u < 4; ++u)
    for (Elt a = 0; a < qr.size(); ++a) CHECK(qd.lres(u, a) == qr.rres(a, u));
  Classification c = classify(qd);
  INFO(c.failing_groupoid, " / ", c.failing_iqf);
  CHECK(c.groupoid_quantale);  // the convention switch preserves the axioms
  CHECK(c.inverse_quantal_frame);
}

TEST_CASE("groupoid shape validation rejects bad tables") {
  FinSpace g0("pt", {"*"}, {});
  FinSpace g1("two", {"e", "g"}, {});
  // product defined on every pair is fine for a group; dropping one entry is not
  CHECK_THROWS_AS(FinGroupoid("bad", g0, g1, {0, 0}, {0, 0}, {0, 1, 1, no_pt}, {0, 1}, {0}),
                  StructuralError);
  // unit table must reference arrows
  CHECK_THROWS_AS(FinGroupoid("bad", g0, g1, {0, 0}, {0, 0}, {0, 1, 1, 0}, {0, 1}, {9}),
                  StructuralError);
}

TEST_CASE("broken inverse table is caught by validation") {
  FinSpace g0("pt", {"*"}, {});
  FinSpace g1("two", {"e", "g"}, {});
  FinGroupoid g("z2_bad_inv", std::move(g0), std::move(g1), {0, 0}, {0, 0}, {0, 1, 1, 0},
                {0, 0}, {0});  // i(g) = e is wrong
  GroupoidReport rep = validate_groupoid(g);
  CHECK_FALSE(rep.valid);
  bool inv_failed = false;
  for (const CheckResult& r : rep.checks)
    if (r.name == "groupoid.inverses" && !r.ok()) inv_failed = true;
  CHECK(inv_failed);
}
