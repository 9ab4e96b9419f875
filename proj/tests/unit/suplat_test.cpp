#include <doctest.h>

#include <qforge/check.hpp>
#include <qforge/suplat.hpp>

using namespace qf;

TEST_CASE("powerset joins and meets are union and intersection") {
  LatPtr p = powerset_lattice(3);
  REQUIRE(p->size() == 8);
  for (Elt a = 0; a < 8; ++a)
    for (Elt b = 0; b < 8; ++b) {
      CHECK(p->join(a, b) == (a | b));
      CHECK(p->meet(a, b) == (a & b));
      CHECK(p->leq(a, b) == ((a & b) == a));
    }
  CHECK(p->bottom() == 0);
  CHECK(p->top() == 7);
  CHECK(validate_suplattice(*p, "p3").ok());
  CHECK(validate_frame(*p, "p3").ok());
}

TEST_CASE("join irreducibles of a powerset are the atoms") {
  LatPtr p = powerset_lattice(3);
  std::vector<Elt> ji = p->join_irreducibles();
  REQUIRE(ji.size() == 3);
  CHECK(ji == std::vector<Elt>{1, 2, 4});
  CHECK(p->ji_below(5) == std::vector<Elt>{1, 4});
}

TEST_CASE("join irreducibles of a chain are the non-bottom elements") {
  LatPtr c = chain_lattice(4);
  CHECK(c->join_irreducibles() == std::vector<Elt>{1, 2, 3});
  CHECK(c->distributive());
  CHECK(validate_suplattice(*c, "c4").ok());
}

TEST_CASE("the diamond is a sup-lattice but not distributive") {
  LatPtr m3 = diamond_m3();
  CHECK(validate_suplattice(*m3, "m3").ok());
  CHECK(!m3->distributive());
  CHECK(!validate_frame(*m3, "m3").ok());
  auto w = m3->distributivity_witness();
  REQUIRE(w.has_value());
  // a /\ (b \/ c) = a with distinct atoms, while (a /\ b) \/ (a /\ c) = bot
  auto [a, b, c] = *w;
  CHECK(m3->meet(a, m3->join(b, c)) != m3->join(m3->meet(a, b), m3->meet(a, c)));
}

TEST_CASE("empty join is bottom and empty meet is top") {
  LatPtr p = powerset_lattice(2);
  CHECK(p->join_of({}) == p->bottom());
  CHECK(p->meet_of({}) == p->top());
  std::vector<Elt> xs = {1, 2};
  CHECK(p->join_of(xs) == 3);
  CHECK(p->meet_of(xs) == 0);
}

TEST_CASE("antisymmetry violations are rejected") {
  CHECK_THROWS_AS(make_lattice({"a", "b"}, {{0, 1}, {1, 0}}), StructuralError);
}

TEST_CASE("posets without enough joins are rejected") {
  // two maximal elements: no top, so no join of the atoms
  CHECK_THROWS_AS(make_lattice({"bot", "a", "b"}, {{0, 1}, {0, 2}}), StructuralError);
}

TEST_CASE("right adjoint of a chain embedding clamps downward") {
  LatPtr c2 = chain_lattice(2), c3 = chain_lattice(3);
  SupMap f(c2, c3, {0, 2});
  CHECK(validate_supmap(f, "embed").ok());
  MonoMap g = right_adjoint(f);
  CHECK(g(0) == 0);
  CHECK(g(1) == 0);
  CHECK(g(2) == 1);
  CHECK(check_adjunction(f, g, "embed").ok());
  CHECK(check_meet_preservation(g, "embed").ok());
}

TEST_CASE("right adjoint is rejected for non join-preserving tables") {
  LatPtr m3 = diamond_m3();
  LatPtr c2 = chain_lattice(2);
  // monotone, sends joins of two atoms inconsistently
  CHECK_THROWS_AS(right_adjoint(SupMap(m3, c2, {0, 1, 0, 0, 1})), StructuralError);
}

TEST_CASE("sup-map composition and identity") {
  LatPtr c2 = chain_lattice(2), c3 = chain_lattice(3);
  SupMap f(c2, c3, {0, 2});
  SupMap g(c3, c2, {0, 0, 1});
  SupMap gf = g.compose(f);
  CHECK(gf(0) == 0);
  CHECK(gf(1) == 1);
  CHECK(gf == SupMap::identity(c2));
}

TEST_CASE("sup-map enumeration counts match hand counts") {
  LatPtr c2 = chain_lattice(2), c3 = chain_lattice(3);
  CHECK(enumerate_supmaps(c2, c2).size() == 2);
  CHECK(enumerate_supmaps(c3, c3).size() == 6);
  CHECK(enumerate_supmaps(powerset_lattice(2), powerset_lattice(2)).size() == 16);
  // diamond to chain: constant bottom, all three atom-assignments with two
  // atoms sent to top are inconsistent, leaving 1 + 3 + 1 tables
  CHECK(enumerate_supmaps(diamond_m3(), c2).size() == 5);
}

TEST_CASE("every enumerated sup-map validates") {
  LatPtr m3 = diamond_m3();
  LatPtr c3 = chain_lattice(3);
  for (const SupMap& f : enumerate_supmaps(m3, c3)) CHECK(validate_supmap(f, "enum").ok());
}

TEST_CASE("validate_supmap flags a monotone non join-preserving table") {
  LatPtr m3 = diamond_m3();
  LatPtr c2 = chain_lattice(2);
  SupMap f(m3, c2, {0, 1, 0, 0, 1});
  CHECK(validate_supmap(f, "bad").verdict == Verdict::fail);
}

TEST_CASE("lattices with equal order tables compare equal in shape") {
  LatPtr a = chain_lattice(3);
  LatPtr b = make_lattice({"lo", "mid", "hi"}, {{0, 1}, {1, 2}});
  CHECK(a->same_order_as(*b));
  CHECK(!a->same_order_as(*powerset_lattice(2)));
}
