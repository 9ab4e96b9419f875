#include <doctest.h>

#include <qforge/check.hpp>
#include <qforge/suplat.hpp>
#include <qforge/tensor.hpp>

using namespace qf;

namespace {

// Arrows of the pair setup on two points, indexed a = 2*i + j for the arrow
// (i, j); source of a is j, target is i.  Restriction actions on subsets.
constexpr unsigned src_of(unsigned a) { return a & 1; }
constexpr unsigned tgt_of(unsigned a) { return a >> 1; }

TensorCtx pair2_balanced() {
  LatPtr arrows = powerset_lattice(4);  // element id = arrow mask
  LatPtr base = powerset_lattice(2);    // element id = point mask
  TensorBase tb;
  tb.base = base;
  tb.ract.resize(16 * 4);
  tb.lact.resize(4 * 16);
  for (Elt m = 0; m < 16; ++m)
    for (Elt b = 0; b < 4; ++b) {
      Elt dmask = 0, rmask = 0;
      for (unsigned a = 0; a < 4; ++a) {
        if (b >> src_of(a) & 1) dmask |= Elt(1) << a;
        if (b >> tgt_of(a) & 1) rmask |= Elt(1) << a;
      }
      tb.ract[std::size_t(m) * 4 + b] = m & dmask;
      tb.lact[std::size_t(b) * 16 + m] = m & rmask;
    }
  return TensorContext::over_base(arrows, arrows, std::move(tb));
}

}  // namespace

TEST_CASE("tensoring with the two-chain changes nothing") {
  TensorCtx ctx = TensorContext::plain(chain_lattice(2), chain_lattice(3));
  TensorLattice t = enumerate_tensor(ctx);
  CHECK(t.lat->size() == 3);
  CHECK(t.lat->same_order_as(*chain_lattice(3)));
}

TEST_CASE("tensor of chains counts antitone row functions") {
  TensorCtx ctx = TensorContext::plain(chain_lattice(3), chain_lattice(3));
  TensorLattice t = enumerate_tensor(ctx);
  CHECK(t.lat->size() == 6);  // pairs r(1) >= r(2) in a three-chain
  CHECK(check_tau_bimorphism(t, "c3xc3").ok());
}

TEST_CASE("tensor of powersets is the powerset of the product") {
  auto sizes = [](std::size_t a, std::size_t b) {
    TensorCtx ctx = TensorContext::plain(powerset_lattice(a), powerset_lattice(b));
    return enumerate_tensor(ctx).lat->size();
  };
  CHECK(sizes(1, 1) == 2);
  CHECK(sizes(2, 1) == 4);
  CHECK(sizes(2, 2) == 16);
}

TEST_CASE("lattice joins of the enumerated tensor match bi-ideal joins") {
  TensorCtx ctx = TensorContext::plain(chain_lattice(3), chain_lattice(3));
  TensorLattice t = enumerate_tensor(ctx);
  for (Elt a = 0; a < t.lat->size(); ++a)
    for (Elt b = 0; b < t.lat->size(); ++b) {
      CHECK(t.lat->join(a, b) == t.id_of(t.elts[a].join(t.elts[b])));
      CHECK(t.lat->meet(a, b) == t.id_of(t.elts[a].meet(t.elts[b])));
    }
}

TEST_CASE("tensor with a non-distributive factor uses the general closure") {
  TensorCtx ctx = TensorContext::plain(diamond_m3(), chain_lattice(2));
  TensorLattice t = enumerate_tensor(ctx);
  // row tables: all-top, three single-atom rows, all-bottom
  CHECK(t.lat->size() == 5);
  CHECK(check_tau_bimorphism(t, "m3xc2").ok());
  // two atoms joined saturate the diamond
  Elt two = t.lat->join(t.tau(1, 1), t.tau(2, 1));
  CHECK(two == t.lat->top());
}

TEST_CASE("tau images generate the tensor under joins") {
  TensorCtx ctx = TensorContext::plain(powerset_lattice(2), chain_lattice(3));
  TensorLattice t = enumerate_tensor(ctx);
  for (Elt a = 0; a < t.lat->size(); ++a) {
    Elt acc = t.lat->bottom();
    const BiIdeal& d = t.elts[a];
    for (Elt j : ctx->left().join_irreducibles()) acc = t.lat->join(acc, t.tau(j, d.row(j)));
    CHECK(acc == a);
  }
}

TEST_CASE("universal property on small tensors") {
  TensorCtx c22 = TensorContext::plain(chain_lattice(2), chain_lattice(2));
  TensorLattice t = enumerate_tensor(c22);
  CHECK(check_tensor_universal(t, chain_lattice(3), "c2xc2->c3").ok());
  CHECK(check_tensor_universal(t, powerset_lattice(2), "c2xc2->p2").ok());
  TensorCtx cp = TensorContext::plain(powerset_lattice(2), chain_lattice(2));
  CHECK(check_tensor_universal(enumerate_tensor(cp), chain_lattice(2), "p2xc2->c2").ok());
}

TEST_CASE("balanced tensor of the pair setup counts composable pairs") {
  TensorCtx ctx = pair2_balanced();
  TensorLattice t = enumerate_tensor(ctx, 4096, 4096);
  // 8 composable arrow pairs; the balanced tensor is their powerset
  CHECK(t.lat->size() == 256);
  CHECK(t.lat->distributive());
  CHECK(check_tau_bimorphism(t, "pair2").ok());
}

TEST_CASE("exchange closure collapses non-composable generators to bottom") {
  TensorCtx ctx = pair2_balanced();
  TensorLattice t = enumerate_tensor(ctx, 4096, 4096);
  for (unsigned a = 0; a < 4; ++a)
    for (unsigned a2 = 0; a2 < 4; ++a2) {
      Elt id = t.tau(Elt(1) << a, Elt(1) << a2);
      if (src_of(a) == tgt_of(a2))
        CHECK(id != t.lat->bottom());
      else
        CHECK(id == t.lat->bottom());
    }
}

TEST_CASE("mapped bi-ideals land on the mapped generators") {
  LatPtr c2 = chain_lattice(2), c3 = chain_lattice(3);
  TensorCtx small = TensorContext::plain(c2, c2);
  TensorCtx big = TensorContext::plain(c3, c2);
  SupMap f(c2, c3, {0, 2});
  SupMap id2 = SupMap::identity(c2);
  TensorLattice ts = enumerate_tensor(small), tb = enumerate_tensor(big);
  SupMap fx = map_tensor(ts, tb, f, id2);
  CHECK(validate_supmap(fx, "f(x)id").ok());
  CHECK(fx(ts.tau(1, 1)) == tb.tau(2, 1));
  CHECK(fx(ts.lat->bottom()) == tb.lat->bottom());
}

TEST_CASE("restriction along the left factor is right adjoint to mapping") {
  LatPtr c2 = chain_lattice(2), c3 = chain_lattice(3);
  TensorCtx small = TensorContext::plain(c2, c2);
  TensorCtx big = TensorContext::plain(c3, c2);
  SupMap f(c2, c3, {0, 2});
  SupMap id2 = SupMap::identity(c2);
  TensorLattice ts = enumerate_tensor(small), tb = enumerate_tensor(big);
  SupMap fx = map_tensor(ts, tb, f, id2);
  for (Elt e = 0; e < tb.lat->size(); ++e) {
    BiIdeal r = tensor_left_restrict(tb.elts[e], f, small);
    Elt re = ts.id_of(r);
    for (Elt d = 0; d < ts.lat->size(); ++d)
      CHECK(ts.lat->leq(d, re) == tb.lat->leq(fx(d), e));
  }
}

TEST_CASE("pairing evaluates generators at the meet") {
  LatPtr c2 = chain_lattice(2);
  TensorCtx ctx = TensorContext::plain(c2, c2);
  TensorLattice t = enumerate_tensor(ctx);
  SupMap id2 = SupMap::identity(c2);
  SupMap pr = pairing(t, id2, id2);
  CHECK(validate_supmap(pr, "[id,id]").ok());
  for (Elt m = 0; m < 2; ++m)
    for (Elt n = 0; n < 2; ++n) CHECK(pr(t.tau(m, n)) == c2->meet(m, n));
}

TEST_CASE("triple ideals respect both exchange interfaces") {
  LatPtr c2 = chain_lattice(2);
  // all four actions are meet with the base element
  std::vector<Elt> meet_tab = {0, 0, 0, 1};  // (v,b) -> v /\ b, row-major v*2+b
  std::vector<Elt> meet_tab_bn = {0, 0, 0, 1};
  TriCtx ctx = std::make_shared<const TriContext>(c2, c2, c2, c2, meet_tab, meet_tab_bn,
                                                  meet_tab, meet_tab_bn);
  TriIdeal bot = TriIdeal::bottom(ctx);
  CHECK(bot.value(1, 1) == 0);
  CHECK(bot.value(0, 1) == 1);  // empty first coordinate carries everything
  TriIdeal t = TriIdeal::tau(ctx, 1, 1, 1);
  CHECK(t.value(1, 1) == 1);
  CHECK(bot.leq(t));
  CHECK(!(t == bot));
  CHECK(t.join(bot) == t);
  CHECK(t.meet(bot) == bot);
}
