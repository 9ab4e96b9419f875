#include "qforge/quantale.hpp"

#include <algorithm>
#include <set>

namespace qf {

namespace {

std::string pair_witness(const SupLattice& l, Elt x, Elt y) {
  return "(" + l.name(x) + ", " + l.name(y) + ")";
}

}  // namespace

Quantale::Quantale(std::string name, LatPtr carrier, std::vector<Elt> mult,
                   std::vector<Elt> involution, Elt unit)
    : name_(std::move(name)), lat_(std::move(carrier)), mult_(std::move(mult)),
      inv_(std::move(involution)) {
  if (!lat_) throw StructuralError("quantale needs a carrier lattice");
  const std::size_t n = lat_->size();
  if (mult_.size() != n * n) throw StructuralError("product table has wrong size");
  if (inv_.size() != n) throw StructuralError("involution table has wrong size");
  for (Elt v : mult_)
    if (v >= n) throw StructuralError("product table references unknown element");
  for (Elt v : inv_)
    if (v >= n) throw StructuralError("involution table references unknown element");
  if (unit != no_elt) designate_unit(unit);
}

Elt Quantale::unit() const {
  if (!unital()) throw UsageError("quantale " + name_ + " has no designated unit");
  return unit_;
}

void Quantale::designate_unit(Elt e) {
  if (e >= size()) throw StructuralError("designated unit is not an element");
  for (Elt x = 0; x < size(); ++x)
    if (mul(e, x) != x || mul(x, e) != x)
      throw StructuralError("designated unit fails at " + lat_->name(x));
  unit_ = e;
}

void Quantale::attach_base(BasedStructure b) {
  if (!b.base) throw StructuralError("base structure needs a base lattice");
  const std::size_t n = size(), nb = b.base->size();
  if (b.lres.size() != nb * n) throw StructuralError("left restriction table has wrong size");
  if (b.rres.size() != n * nb) throw StructuralError("right restriction table has wrong size");
  for (Elt v : b.lres)
    if (v >= n) throw StructuralError("left restriction references unknown element");
  for (Elt v : b.rres)
    if (v >= n) throw StructuralError("right restriction references unknown element");
  based_ = std::move(b);
}

const BasedStructure& Quantale::based() const {
  if (!has_base()) throw UsageError("quantale " + name_ + " has no base structure");
  return based_;
}

const SupLattice& Quantale::base() const { return *based().base; }
LatPtr Quantale::base_ptr() const { return based().base; }

Elt Quantale::lres(Elt a, Elt x) const { return based().lres[std::size_t(a) * size() + x]; }
Elt Quantale::rres(Elt x, Elt a) const {
  return based().rres[std::size_t(x) * based_.base->size() + a];
}

void Quantale::attach_support(std::vector<Elt> spp) {
  if (!has_base()) throw UsageError("attach a base before a support");
  if (spp.size() != size()) throw StructuralError("support table has wrong size");
  for (Elt v : spp)
    if (v >= based_.base->size()) throw StructuralError("support references unknown base element");
  spp_ = std::move(spp);
}

Elt Quantale::spp(Elt x) const {
  if (!has_support()) throw UsageError("quantale " + name_ + " has no support");
  return spp_[x];
}

void Quantale::attach_upsilon(std::vector<Elt> ups) {
  if (!has_base()) throw UsageError("attach a base before a unit-space trace");
  if (ups.size() != size()) throw StructuralError("unit-space trace table has wrong size");
  for (Elt v : ups)
    if (v >= based_.base->size())
      throw StructuralError("unit-space trace references unknown base element");
  ups_ = std::move(ups);
}

Elt Quantale::upsilon(Elt x) const {
  if (!has_upsilon()) throw UsageError("quantale " + name_ + " has no unit-space trace");
  return ups_[x];
}

const char* package_name(Package p) {
  switch (p) {
    case Package::involutive: return "involutive";
    case Package::based: return "based";
    case Package::quantal_frame: return "quantal-frame";
    case Package::supported: return "supported";
    case Package::equivariant: return "equivariant";
    case Package::stable: return "stable";
    case Package::reflexive: return "reflexive";
  }
  return "?";
}

std::vector<Package> packages_present(const Quantale& q) {
  std::vector<Package> ps = {Package::involutive};
  if (q.has_base()) {
    ps.push_back(Package::based);
    ps.push_back(Package::quantal_frame);
  }
  if (q.has_support() && q.has_base()) {
    ps.push_back(Package::supported);
    ps.push_back(Package::equivariant);
    ps.push_back(Package::stable);
  }
  if (q.has_upsilon() && q.has_base()) ps.push_back(Package::reflexive);
  return ps;
}

namespace {

// Join preservation of the product in each slot.  Exhaustive for small
// carriers; for large distributive carriers the product is instead rebuilt
// from irreducible factors, which is equivalent since irreducibles are
// join-prime in a distributive lattice.
CheckResult check_product_joins(const Quantale& q) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  const std::string kind = "quantale.product_joins";
  if (n <= 128 || !l.distributive()) {
    for (Elt z = 0; z < n; ++z) {
      if (q.mul(l.bottom(), z) != l.bottom())
        return fail_result(kind, q.name(), "bot * " + l.name(z) + " != bot");
      if (q.mul(z, l.bottom()) != l.bottom())
        return fail_result(kind, q.name(), l.name(z) + " * bot != bot");
    }
    for (Elt x = 0; x < n; ++x)
      for (Elt y = x; y < n; ++y) {
        Elt j = l.join(x, y);
        for (Elt z = 0; z < n; ++z) {
          if (q.mul(j, z) != l.join(q.mul(x, z), q.mul(y, z)))
            return fail_result(kind, q.name(),
                               "left slot at " + pair_witness(l, x, y) + " * " + l.name(z));
          if (q.mul(z, j) != l.join(q.mul(z, x), q.mul(z, y)))
            return fail_result(kind, q.name(),
                               "right slot at " + l.name(z) + " * " + pair_witness(l, x, y));
        }
      }
    return pass_result(kind, q.name());
  }
  for (Elt x = 0; x < n; ++x)
    for (Elt y = 0; y < n; ++y) {
      Elt acc = l.bottom();
      for (Elt j : l.ji_below(x))
        for (Elt k : l.ji_below(y)) acc = l.join(acc, q.mul(j, k));
      if (acc != q.mul(x, y))
        return fail_result(kind, q.name(),
                           "product at " + pair_witness(l, x, y) +
                               " differs from the join over irreducible factors");
    }
  return pass_result(kind, q.name());
}

CheckResult check_assoc(const Quantale& q) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  const std::string kind = "quantale.assoc";
  if (n <= 128 || !l.distributive()) {
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y)
        for (Elt z = 0; z < n; ++z)
          if (q.mul(q.mul(x, y), z) != q.mul(x, q.mul(y, z)))
            return fail_result(kind, q.name(),
                               "(" + l.name(x) + " " + l.name(y) + ") " + l.name(z) +
                                   " != " + l.name(x) + " (" + l.name(y) + " " + l.name(z) + ")");
    return pass_result(kind, q.name());
  }
  // join preservation reduces associativity to irreducible triples
  const auto& ji = l.join_irreducibles();
  for (Elt x : ji)
    for (Elt y : ji)
      for (Elt z : ji)
        if (q.mul(q.mul(x, y), z) != q.mul(x, q.mul(y, z)))
          return fail_result(kind, q.name(),
                             "irreducible triple (" + l.name(x) + ", " + l.name(y) + ", " +
                                 l.name(z) + ")");
  return pass_result(kind, q.name());
}

void run_core(const Quantale& q, std::vector<CheckResult>& out) {
  out.push_back(check_product_joins(q));
  out.push_back(check_assoc(q));
  if (q.unital()) {
    const SupLattice& l = q.lat();
    CheckResult r = pass_result("quantale.designated_unit", q.name());
    for (Elt x = 0; x < l.size(); ++x)
      if (q.mul(q.unit(), x) != x || q.mul(x, q.unit()) != x) {
        r = fail_result("quantale.designated_unit", q.name(), "fails at " + l.name(x));
        break;
      }
    out.push_back(r);
  }
}

void run_involutive(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  {
    CheckResult r = pass_result("involution.join_preserving", q.name());
    if (q.star(l.bottom()) != l.bottom())
      r = fail_result("involution.join_preserving", q.name(), "bot* != bot");
    for (Elt x = 0; x < n && r.ok(); ++x)
      for (Elt y = x; y < n; ++y)
        if (q.star(l.join(x, y)) != l.join(q.star(x), q.star(y))) {
          r = fail_result("involution.join_preserving", q.name(), "at " + pair_witness(l, x, y));
          break;
        }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("involution.involutive", q.name());
    for (Elt x = 0; x < n; ++x)
      if (q.star(q.star(x)) != x) {
        r = fail_result("involution.involutive", q.name(),
                        l.name(x) + "** = " + l.name(q.star(q.star(x))));
        break;
      }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("involution.antihomomorphism", q.name());
    for (Elt x = 0; x < n && r.ok(); ++x)
      for (Elt y = 0; y < n; ++y)
        if (q.star(q.mul(x, y)) != q.mul(q.star(y), q.star(x))) {
          r = fail_result("involution.antihomomorphism", q.name(), "at " + pair_witness(l, x, y));
          break;
        }
    out.push_back(std::move(r));
  }
}

void run_based(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  const std::size_t n = l.size(), nb = b.size();
  out.push_back([&] {
    CheckResult r = validate_frame(b, q.name());
    r.name = "based.base_is_frame";
    return r;
  }());
  {
    CheckResult r = pass_result("based.unital_actions", q.name());
    for (Elt x = 0; x < n; ++x)
      if (q.lres(b.top(), x) != x || q.rres(x, b.top()) != x) {
        r = fail_result("based.unital_actions", q.name(), "at " + l.name(x));
        break;
      }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("based.module_laws", q.name());
    for (Elt a = 0; a < nb && r.ok(); ++a)
      for (Elt c = 0; c < nb && r.ok(); ++c)
        for (Elt x = 0; x < n; ++x) {
          if (q.lres(a, q.lres(c, x)) != q.lres(b.meet(a, c), x)) {
            r = fail_result("based.module_laws", q.name(),
                            "left at (" + b.name(a) + ", " + b.name(c) + ", " + l.name(x) + ")");
            break;
          }
          if (q.rres(q.rres(x, a), c) != q.rres(x, b.meet(a, c))) {
            r = fail_result("based.module_laws", q.name(),
                            "right at (" + l.name(x) + ", " + b.name(a) + ", " + b.name(c) + ")");
            break;
          }
        }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("based.middle_commutes", q.name());
    for (Elt a = 0; a < nb && r.ok(); ++a)
      for (Elt c = 0; c < nb && r.ok(); ++c)
        for (Elt x = 0; x < n; ++x)
          if (q.rres(q.lres(a, x), c) != q.lres(a, q.rres(x, c))) {
            r = fail_result("based.middle_commutes", q.name(),
                            "at (" + b.name(a) + ", " + l.name(x) + ", " + b.name(c) + ")");
            break;
          }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("based.action_joins", q.name());
    for (Elt a = 0; a < nb && r.ok(); ++a) {
      if (q.lres(a, l.bottom()) != l.bottom() || q.rres(l.bottom(), a) != l.bottom()) {
        r = fail_result("based.action_joins", q.name(), "bottom at " + b.name(a));
        break;
      }
      for (Elt x = 0; x < n && r.ok(); ++x)
        for (Elt y = x; y < n; ++y) {
          Elt j = l.join(x, y);
          if (q.lres(a, j) != l.join(q.lres(a, x), q.lres(a, y)) ||
              q.rres(j, a) != l.join(q.rres(x, a), q.rres(y, a))) {
            r = fail_result("based.action_joins", q.name(),
                            "module slot at " + b.name(a) + ", " + pair_witness(l, x, y));
            break;
          }
        }
    }
    for (Elt x = 0; x < n && r.ok(); ++x) {
      if (q.lres(b.bottom(), x) != l.bottom() || q.rres(x, b.bottom()) != l.bottom()) {
        r = fail_result("based.action_joins", q.name(), "base bottom at " + l.name(x));
        break;
      }
      for (Elt a = 0; a < nb && r.ok(); ++a)
        for (Elt c = a; c < nb; ++c) {
          Elt j = b.join(a, c);
          if (q.lres(j, x) != l.join(q.lres(a, x), q.lres(c, x)) ||
              q.rres(x, j) != l.join(q.rres(x, a), q.rres(x, c))) {
            r = fail_result("based.action_joins", q.name(),
                            "base slot at " + pair_witness(b, a, c) + ", " + l.name(x));
            break;
          }
        }
    }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("based.product_compat", q.name());
    for (Elt a = 0; a < nb && r.ok(); ++a)
      for (Elt x = 0; x < n && r.ok(); ++x)
        for (Elt y = 0; y < n; ++y) {
          if (q.mul(q.lres(a, x), y) != q.lres(a, q.mul(x, y))) {
            r = fail_result("based.product_compat", q.name(),
                            "(a<|x)y at (" + b.name(a) + ", " + l.name(x) + ", " + l.name(y) + ")");
            break;
          }
          if (q.mul(q.rres(x, a), y) != q.mul(x, q.lres(a, y))) {
            r = fail_result("based.product_compat", q.name(),
                            "(x|>a)y at (" + l.name(x) + ", " + b.name(a) + ", " + l.name(y) + ")");
            break;
          }
          if (q.rres(q.mul(x, y), a) != q.mul(x, q.rres(y, a))) {
            r = fail_result("based.product_compat", q.name(),
                            "(xy)|>a at (" + l.name(x) + ", " + l.name(y) + ", " + b.name(a) + ")");
            break;
          }
        }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("based.involution_twist", q.name());
    for (Elt a = 0; a < nb && r.ok(); ++a)
      for (Elt c = 0; c < nb && r.ok(); ++c)
        for (Elt x = 0; x < n; ++x)
          if (q.star(q.lres(a, q.rres(x, c))) != q.lres(c, q.rres(q.star(x), a))) {
            r = fail_result("based.involution_twist", q.name(),
                            "at (" + b.name(a) + ", " + l.name(x) + ", " + b.name(c) + ")");
            break;
          }
    out.push_back(std::move(r));
  }
}

void run_quantal_frame(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  out.push_back([&] {
    CheckResult r = validate_frame(l, q.name());
    r.name = "qframe.carrier_is_frame";
    return r;
  }());
  CheckResult r = pass_result("qframe.restriction_meets", q.name());
  for (Elt a = 0; a < b.size() && r.ok(); ++a)
    for (Elt x = 0; x < l.size() && r.ok(); ++x)
      for (Elt m = 0; m < l.size(); ++m) {
        if (l.meet(q.lres(a, x), m) != q.lres(a, l.meet(x, m))) {
          r = fail_result("qframe.restriction_meets", q.name(),
                          "left at (" + b.name(a) + ", " + l.name(x) + ", " + l.name(m) + ")");
          break;
        }
        if (l.meet(m, q.rres(x, a)) != q.rres(l.meet(x, m), a)) {
          r = fail_result("qframe.restriction_meets", q.name(),
                          "right at (" + l.name(m) + ", " + l.name(x) + ", " + b.name(a) + ")");
          break;
        }
      }
  out.push_back(std::move(r));
}

void run_supported(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  const std::size_t n = l.size();
  {
    CheckResult r = pass_result("support.sup_map", q.name());
    if (q.spp(l.bottom()) != b.bottom())
      r = fail_result("support.sup_map", q.name(), "spp(bot) != bot");
    for (Elt x = 0; x < n && r.ok(); ++x)
      for (Elt y = x; y < n; ++y)
        if (q.spp(l.join(x, y)) != b.join(q.spp(x), q.spp(y))) {
          r = fail_result("support.sup_map", q.name(), "at " + pair_witness(l, x, y));
          break;
        }
    out.push_back(std::move(r));
  }
  out.push_back(q.spp(l.top()) == b.top()
                    ? pass_result("support.full", q.name())
                    : fail_result("support.full", q.name(),
                                  "spp(top) = " + b.name(q.spp(l.top()))));
  {
    CheckResult r = pass_result("support.cover", q.name());
    for (Elt x = 0; x < n && r.ok(); ++x)
      for (Elt y = 0; y < n; ++y) {
        Elt lhs = q.lres(q.spp(x), y);
        Elt rhs = q.mul(q.mul(x, q.star(x)), y);
        if (!l.leq(lhs, rhs)) {
          r = fail_result("support.cover", q.name(),
                          "spp(" + l.name(x) + ")<|" + l.name(y) + " not below xx*y");
          break;
        }
      }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("support.restrict", q.name());
    for (Elt x = 0; x < n; ++x)
      if (q.lres(q.spp(x), x) != x) {
        r = fail_result("support.restrict", q.name(), "at " + l.name(x));
        break;
      }
    out.push_back(std::move(r));
  }
}

void run_equivariant(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  CheckResult r = pass_result("support.equivariant", q.name());
  for (Elt a = 0; a < b.size() && r.ok(); ++a)
    for (Elt x = 0; x < l.size(); ++x)
      if (q.spp(q.lres(a, x)) != b.meet(a, q.spp(x))) {
        r = fail_result("support.equivariant", q.name(),
                        "at (" + b.name(a) + ", " + l.name(x) + ")");
        break;
      }
  out.push_back(std::move(r));
}

void run_stable(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  CheckResult r = pass_result("support.stable", q.name());
  for (Elt x = 0; x < l.size() && r.ok(); ++x)
    for (Elt y = 0; y < l.size(); ++y)
      if (!b.leq(q.spp(q.mul(x, y)), q.spp(x))) {
        r = fail_result("support.stable", q.name(), "at " + pair_witness(l, x, y));
        break;
      }
  out.push_back(std::move(r));
}

void run_reflexive(const Quantale& q, std::vector<CheckResult>& out) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  const std::size_t n = l.size();
  {
    CheckResult r = pass_result("reflexive.frame_map", q.name());
    if (q.upsilon(l.bottom()) != b.bottom())
      r = fail_result("reflexive.frame_map", q.name(), "bot fails");
    if (r.ok() && q.upsilon(l.top()) != b.top())
      r = fail_result("reflexive.frame_map", q.name(), "top fails");
    for (Elt x = 0; x < n && r.ok(); ++x)
      for (Elt y = x; y < n; ++y) {
        if (q.upsilon(l.join(x, y)) != b.join(q.upsilon(x), q.upsilon(y))) {
          r = fail_result("reflexive.frame_map", q.name(), "join at " + pair_witness(l, x, y));
          break;
        }
        if (q.upsilon(l.meet(x, y)) != b.meet(q.upsilon(x), q.upsilon(y))) {
          r = fail_result("reflexive.frame_map", q.name(), "meet at " + pair_witness(l, x, y));
          break;
        }
      }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("reflexive.unit_trace", q.name());
    for (Elt a = 0; a < b.size(); ++a) {
      if (q.upsilon(q.lres(a, l.top())) != a || q.upsilon(q.rres(l.top(), a)) != a) {
        r = fail_result("reflexive.unit_trace", q.name(), "at " + b.name(a));
        break;
      }
    }
    out.push_back(std::move(r));
  }
}

}  // namespace

std::vector<CheckResult> validate_quantale(const Quantale& q,
                                           const std::vector<Package>& packages) {
  std::set<Package> want(packages.begin(), packages.end());
  auto need_base = [&](Package p) {
    if (!q.has_base())
      throw UsageError(std::string("package ") + package_name(p) + " needs a base structure");
  };
  std::vector<CheckResult> out;
  run_core(q, out);
  for (Package p : {Package::involutive, Package::based, Package::quantal_frame,
                    Package::supported, Package::equivariant, Package::stable,
                    Package::reflexive}) {
    if (!want.count(p)) continue;
    switch (p) {
      case Package::involutive: run_involutive(q, out); break;
      case Package::based:
        need_base(p);
        run_based(q, out);
        break;
      case Package::quantal_frame:
        need_base(p);
        run_quantal_frame(q, out);
        break;
      case Package::supported:
        need_base(p);
        if (!q.has_support()) throw UsageError("package supported needs a support");
        run_supported(q, out);
        break;
      case Package::equivariant:
        need_base(p);
        if (!q.has_support()) throw UsageError("package equivariant needs a support");
        run_equivariant(q, out);
        break;
      case Package::stable:
        need_base(p);
        if (!q.has_support()) throw UsageError("package stable needs a support");
        run_stable(q, out);
        break;
      case Package::reflexive:
        need_base(p);
        if (!q.has_upsilon()) throw UsageError("package reflexive needs a unit-space trace");
        run_reflexive(q, out);
        break;
    }
  }
  return out;
}

RightSidedResult right_sided(const Quantale& q) {
  const SupLattice& l = q.lat();
  RightSidedResult res;
  for (Elt a = 0; a < l.size(); ++a)
    if (l.leq(q.mul(a, l.top()), a)) res.elements.push_back(a);
  if (q.has_base() && q.has_support()) {
    const SupLattice& b = q.base();
    CheckResult section = pass_result("rs.section", q.name());
    CheckResult retraction = pass_result("rs.retraction", q.name());
    CheckResult embedding = pass_result("rs.order_embedding", q.name());
    for (Elt x = 0; x < b.size(); ++x) {
      Elt r = q.lres(x, l.top());
      if (!l.leq(q.mul(r, l.top()), r)) {
        section = fail_result("rs.section", q.name(),
                              b.name(x) + "<|top is not right-sided");
        break;
      }
      if (q.spp(r) != x) {
        section = fail_result("rs.section", q.name(),
                              "spp(" + b.name(x) + "<|top) = " + b.name(q.spp(r)));
        break;
      }
    }
    for (Elt a : res.elements)
      if (q.lres(q.spp(a), l.top()) != a) {
        retraction = fail_result("rs.retraction", q.name(),
                                 "spp(" + l.name(a) + ")<|top = " +
                                     l.name(q.lres(q.spp(a), l.top())));
        break;
      }
    for (Elt x = 0; x < b.size() && embedding.ok(); ++x)
      for (Elt y = 0; y < b.size(); ++y)
        if (b.leq(x, y) != l.leq(q.lres(x, l.top()), q.lres(y, l.top()))) {
          embedding = fail_result("rs.order_embedding", q.name(), "at " + pair_witness(b, x, y));
          break;
        }
    res.checks.push_back(std::move(section));
    res.checks.push_back(std::move(retraction));
    res.checks.push_back(std::move(embedding));
  }
  return res;
}

PartialUnitsResult partial_units(const Quantale& q) {
  const SupLattice& l = q.lat();
  Elt e = q.unit();  // UsageError when absent
  PartialUnitsResult res;
  for (Elt s = 0; s < l.size(); ++s)
    if (l.leq(q.mul(q.star(s), s), e) && l.leq(q.mul(s, q.star(s)), e)) res.elements.push_back(s);
  Elt j = l.bottom();
  for (Elt s : res.elements) j = l.join(j, s);
  res.join_is_top = j == l.top()
                        ? pass_result("iq.partial_units_cover", q.name())
                        : fail_result("iq.partial_units_cover", q.name(),
                                      "join of partial units is " + l.name(j));
  return res;
}

CheckResult check_unit_laws(const Quantale& q) {
  if (!q.has_upsilon()) throw UsageError("unit laws need a unit-space trace");
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  // bucket by product, then fold the buckets below each target
  std::vector<Elt> bucket(n, l.bottom());
  for (Elt x = 0; x < n; ++x)
    for (Elt y = 0; y < n; ++y) {
      Elt p = q.mul(x, y);
      bucket[p] = l.join(bucket[p], q.lres(q.upsilon(x), y));
    }
  for (Elt a = 0; a < n; ++a) {
    Elt acc = l.bottom();
    for (Elt p = 0; p < n; ++p)
      if (l.leq(p, a)) acc = l.join(acc, bucket[p]);
    if (acc != a)
      return fail_result("ql.unit_laws", q.name(),
                         "a = " + l.name(a) + " rebuilt as " + l.name(acc));
  }
  return pass_result("ql.unit_laws", q.name());
}

CheckResult check_inverse_law(const Quantale& q) {
  if (!q.has_upsilon()) throw UsageError("the inverse law needs a unit-space trace");
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  std::vector<Elt> self(n);
  for (Elt x = 0; x < n; ++x) self[x] = q.mul(x, q.star(x));
  for (Elt a = 0; a < n; ++a) {
    Elt rhs = l.bottom();
    for (Elt x = 0; x < n; ++x)
      if (l.leq(self[x], a)) rhs = l.join(rhs, x);
    Elt lhs = q.lres(q.upsilon(a), l.top());
    if (lhs != rhs)
      return fail_result("ql.inverse_law", q.name(),
                         "a = " + l.name(a) + ": " + l.name(lhs) + " vs " + l.name(rhs));
  }
  return pass_result("ql.inverse_law", q.name());
}

TensorCtx quantale_tensor_ctx(const Quantale& q) {
  const BasedStructure& bs = q.based();
  TensorBase tb;
  tb.base = bs.base;
  tb.ract = bs.rres;  // |Q| x |B|, matching the ract layout
  tb.lact = bs.lres;  // |B| x |Q|, matching the lact layout
  return TensorContext::over_base(q.lat_ptr(), q.lat_ptr(), std::move(tb));
}

std::vector<Elt> mu_star_row(const Quantale& q, Elt a) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  std::vector<Elt> row(n, l.bottom());
  for (Elt x = 0; x < n; ++x) {
    Elt acc = l.bottom();
    for (Elt y = 0; y < n; ++y)
      if (l.leq(q.mul(x, y), a)) acc = l.join(acc, y);
    row[x] = acc;
  }
  return row;
}

Elt apply_mu(const Quantale& q, const BiIdeal& d) {
  const SupLattice& l = q.lat();
  Elt acc = l.bottom();
  for (Elt x = 0; x < l.size(); ++x) acc = l.join(acc, q.mul(x, d.row(x)));
  return acc;
}

namespace {

bool based_laws_hold(const Quantale& q) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size(), nb = q.base().size();
  for (Elt a = 0; a < nb; ++a)
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y) {
        if (q.mul(q.lres(a, x), y) != q.lres(a, q.mul(x, y))) return false;
        if (q.mul(q.rres(x, a), y) != q.mul(x, q.lres(a, y))) return false;
        if (q.rres(q.mul(x, y), a) != q.mul(x, q.rres(y, a))) return false;
      }
  return true;
}

}  // namespace

std::vector<CheckResult> check_multiplicative(const Quantale& q, std::size_t max_cells) {
  const SupLattice& l = q.lat();
  const std::size_t n = l.size();
  std::vector<CheckResult> out;
  TensorCtx ctx;
  try {
    ctx = quantale_tensor_ctx(q);
  } catch (const StructuralError& e) {
    out.push_back(fail_result("mult.tensor_context", q.name(), e.what()));
    return out;
  }
  const bool based_ok = based_laws_hold(q);

  std::vector<std::vector<Elt>> rows(n);
  for (Elt a = 0; a < n; ++a) rows[a] = mu_star_row(q, a);

  {
    CheckResult r = pass_result("mult.comult_in_tensor", q.name());
    for (Elt a = 0; a < n; ++a) {
      std::vector<Elt> closed = rows[a];
      ctx->close(closed);
      if (closed != rows[a]) {
        std::string w = "row of comult(" + l.name(a) + ") is not closed";
        r = based_ok ? incident_result("mult.comult_in_tensor", q.name(),
                                       w + " although the based laws hold")
                     : fail_result("mult.comult_in_tensor", q.name(), w);
        break;
      }
    }
    out.push_back(std::move(r));
  }
  {
    BiIdeal bot = BiIdeal::bottom(ctx);
    out.push_back(rows[l.bottom()] == bot.rows()
                      ? pass_result("mult.comult_bottom", q.name())
                      : fail_result("mult.comult_bottom", q.name(),
                                    "comult(bot) differs from the tensor bottom"));
  }
  {
    CheckResult r = pass_result("mult.comult_joins", q.name());
    if (l.distributive()) {
      for (Elt a = 0; a < n; ++a) {
        std::vector<Elt> seed(n, l.bottom());
        for (Elt j : l.ji_below(a))
          for (Elt x = 0; x < n; ++x) seed[x] = l.join(seed[x], rows[j][x]);
        ctx->close(seed);
        if (seed != rows[a]) {
          r = fail_result("mult.comult_joins", q.name(),
                          "comult(" + l.name(a) + ") is not the join of its irreducible parts");
          break;
        }
      }
    } else {
      for (Elt x = 0; x < n && r.ok(); ++x)
        for (Elt y = x; y < n; ++y) {
          std::vector<Elt> seed(n);
          for (Elt m = 0; m < n; ++m) seed[m] = l.join(rows[x][m], rows[y][m]);
          ctx->close(seed);
          if (seed != rows[l.join(x, y)]) {
            r = fail_result("mult.comult_joins", q.name(),
                            "binary join at " + pair_witness(l, x, y));
            break;
          }
        }
    }
    out.push_back(std::move(r));
  }

  // independent route: enumerate the tensor and take the literal adjoint
  if (n * n <= max_cells) {
    try {
      TensorLattice t = enumerate_tensor(ctx, max_cells, max_cells);
      std::vector<Elt> tab(t.elts.size());
      for (Elt i = 0; i < t.elts.size(); ++i) tab[i] = apply_mu(q, t.elts[i]);
      SupMap mu(t.lat, q.lat_ptr(), std::move(tab));
      {
        CheckResult r = validate_supmap(mu, q.name());
        r.name = "mult.mu_sup_map";
        out.push_back(std::move(r));
      }
      {
        CheckResult r = pass_result("mult.mu_on_generators", q.name());
        for (Elt x = 0; x < n && r.ok(); ++x)
          for (Elt y = 0; y < n; ++y)
            if (mu(t.tau(x, y)) != q.mul(x, y)) {
              r = fail_result("mult.mu_on_generators", q.name(), "at " + pair_witness(l, x, y));
              break;
            }
        out.push_back(std::move(r));
      }
      try {
        MonoMap adj = right_adjoint(mu);
        CheckResult r = pass_result("mult.comult_cross_route", q.name());
        for (Elt a = 0; a < n; ++a) {
          Elt via_formula = t.id_of(BiIdeal(ctx, rows[a]));
          if (adj(a) != via_formula) {
            r = incident_result("mult.comult_cross_route", q.name(),
                                "adjoint at " + l.name(a) + " differs from the row formula");
            break;
          }
        }
        out.push_back(std::move(r));
      } catch (const StructuralError& e) {
        out.push_back(fail_result("mult.comult_cross_route", q.name(), e.what()));
      }
    } catch (const CapacityError& e) {
      out.push_back(skipped_result("mult.comult_cross_route", q.name(), e.what()));
    }
  } else {
    out.push_back(skipped_result("mult.comult_cross_route", q.name(),
                                 "tensor square of " + std::to_string(n) +
                                     " elements exceeds the cell guard"));
  }
  return out;
}

std::vector<CheckResult> check_stability_forms(const Quantale& q) {
  if (!q.has_support()) throw UsageError("stability needs a support");
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  const std::size_t n = l.size();
  std::vector<CheckResult> out;

  CheckResult f1 = pass_result("support.stable_product", q.name());
  for (Elt x = 0; x < n && f1.ok(); ++x)
    for (Elt y = 0; y < n; ++y)
      if (!b.leq(q.spp(q.mul(x, y)), q.spp(x))) {
        f1 = fail_result("support.stable_product", q.name(), "at " + pair_witness(l, x, y));
        break;
      }
  CheckResult f2 = pass_result("support.stable_top", q.name());
  for (Elt x = 0; x < n; ++x)
    if (!b.leq(q.spp(q.mul(x, l.top())), q.spp(x))) {
      f2 = fail_result("support.stable_top", q.name(), "at " + l.name(x));
      break;
    }
  CheckResult f3 = pass_result("support.stable_via_restriction", q.name());
  for (Elt x = 0; x < n && f3.ok(); ++x)
    for (Elt y = 0; y < n; ++y)
      if (q.spp(q.mul(x, y)) != q.spp(q.rres(x, q.spp(y)))) {
        f3 = fail_result("support.stable_via_restriction", q.name(),
                         "at " + pair_witness(l, x, y));
        break;
      }
  bool b1 = f1.ok(), b2 = f2.ok(), b3 = f3.ok();
  out.push_back(std::move(f1));
  out.push_back(std::move(f2));
  out.push_back(std::move(f3));
  if (b1 == b2 && b2 == b3)
    out.push_back(pass_result("support.stability_agreement", q.name()));
  else
    out.push_back(incident_result(
        "support.stability_agreement", q.name(),
        std::string("equivalent formulations diverge: product=") + (b1 ? "pass" : "fail") +
            " top=" + (b2 ? "pass" : "fail") + " restriction=" + (b3 ? "pass" : "fail")));
  return out;
}

CheckResult check_support_unique(const Quantale& q, std::size_t guard) {
  if (!q.has_support()) throw UsageError("support uniqueness needs a support");
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  const std::size_t n = l.size();
  for (Elt a = 0; a < b.size(); ++a)
    for (Elt x = 0; x < n; ++x)
      if (q.spp(q.lres(a, x)) != b.meet(a, q.spp(x)))
        return skipped_result("support.unique", q.name(),
                              "attached support is not equivariant, uniqueness does not apply");
  std::vector<SupMap> maps;
  try {
    maps = enumerate_supmaps(q.lat_ptr(), q.base_ptr(), guard);
  } catch (const CapacityError& e) {
    return skipped_result("support.unique", q.name(), e.what());
  }
  for (const SupMap& f : maps) {
    if (f(l.top()) != b.top()) continue;
    bool ok = true;
    for (Elt x = 0; x < n && ok; ++x) {
      if (q.lres(f(x), x) != x) ok = false;
      for (Elt y = 0; y < n && ok; ++y)
        if (!l.leq(q.lres(f(x), y), q.mul(q.mul(x, q.star(x)), y))) ok = false;
    }
    if (!ok) continue;
    for (Elt x = 0; x < n; ++x)
      if (f(x) != q.spp(x))
        return incident_result("support.unique", q.name(),
                               "a second support exists, differing at " + l.name(x));
  }
  return pass_result("support.unique", q.name());
}

std::vector<CheckResult> check_iota_iso(const Quantale& q) {
  const SupLattice& l = q.lat();
  const SupLattice& b = q.base();
  Elt e = q.unit();  // UsageError when absent
  std::vector<CheckResult> out;
  auto iota = [&](Elt a) { return q.lres(a, e); };
  {
    CheckResult r = pass_result("iota.order_iso", q.name());
    for (Elt a = 0; a < b.size() && r.ok(); ++a) {
      if (!l.leq(iota(a), e)) {
        r = fail_result("iota.order_iso", q.name(),
                        b.name(a) + "<|e is not below the unit");
        break;
      }
      for (Elt c = 0; c < b.size(); ++c)
        if (b.leq(a, c) != l.leq(iota(a), iota(c))) {
          r = fail_result("iota.order_iso", q.name(), "not an embedding at " + pair_witness(b, a, c));
          break;
        }
    }
    if (r.ok()) {
      for (Elt x = 0; x < l.size(); ++x) {
        if (!l.leq(x, e)) continue;
        bool hit = false;
        for (Elt a = 0; a < b.size() && !hit; ++a) hit = iota(a) == x;
        if (!hit) {
          r = fail_result("iota.order_iso", q.name(), l.name(x) + " below e has no preimage");
          break;
        }
      }
    }
    out.push_back(std::move(r));
  }
  {
    CheckResult r = pass_result("iota.transforms_actions", q.name());
    for (Elt a = 0; a < b.size() && r.ok(); ++a)
      for (Elt x = 0; x < l.size(); ++x) {
        if (q.lres(a, x) != q.mul(iota(a), x)) {
          r = fail_result("iota.transforms_actions", q.name(),
                          "left at (" + b.name(a) + ", " + l.name(x) + ")");
          break;
        }
        if (q.rres(x, a) != q.mul(x, iota(a))) {
          r = fail_result("iota.transforms_actions", q.name(),
                          "right at (" + l.name(x) + ", " + b.name(a) + ")");
          break;
        }
      }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Elt> abstract_units(const Quantale& q) {
  const SupLattice& l = q.lat();
  std::vector<Elt> out;
  for (Elt u = 0; u < l.size(); ++u) {
    bool ok = true;
    for (Elt x = 0; x < l.size() && ok; ++x) ok = q.mul(u, x) == x && q.mul(x, u) == x;
    if (ok) out.push_back(u);
  }
  return out;
}

Classification classify(const Quantale& q, std::size_t max_cells) {
  if (!q.has_base() || !q.has_support() || !q.has_upsilon())
    throw UsageError("classification needs base, support, and unit-space trace");
  Classification res;
  std::vector<CheckResult>& detail = res.detail;

  std::vector<CheckResult> axioms = validate_quantale(
      q, {Package::involutive, Package::based, Package::quantal_frame, Package::supported,
          Package::equivariant, Package::stable, Package::reflexive});
  detail.insert(detail.end(), axioms.begin(), axioms.end());
  std::vector<CheckResult> mult = check_multiplicative(q, max_cells);
  detail.insert(detail.end(), mult.begin(), mult.end());
  detail.push_back(check_unit_laws(q));
  detail.push_back(check_inverse_law(q));

  auto find = [&](const std::string& name) -> const CheckResult* {
    for (const CheckResult& r : detail)
      if (r.name == name) return &r;
    return nullptr;
  };
  auto holds = [&](const std::string& name) {
    const CheckResult* r = find(name);
    return r && r->verdict == Verdict::pass;
  };

  // equivariant implies stable; diverging is a theorem violation
  if (holds("support.equivariant") && !holds("support.stable"))
    detail.push_back(incident_result("support.equivariant_implies_stable", q.name(),
                                     "equivariance holds but stability fails"));

  const std::vector<std::string> groupoid_req = {
      "quantale.product_joins", "quantale.assoc",      "involution.join_preserving",
      "involution.involutive",  "involution.antihomomorphism",
      "based.base_is_frame",    "based.unital_actions", "based.module_laws",
      "based.middle_commutes",  "based.action_joins",   "based.product_compat",
      "based.involution_twist", "qframe.carrier_is_frame", "qframe.restriction_meets",
      "support.sup_map",        "support.full",         "support.cover",
      "support.restrict",       "support.equivariant",  "reflexive.frame_map",
      "reflexive.unit_trace",   "mult.comult_in_tensor", "mult.comult_bottom",
      "mult.comult_joins",      "ql.unit_laws",         "ql.inverse_law"};
  res.groupoid_quantale = true;
  for (const std::string& name : groupoid_req) {
    const CheckResult* r = find(name);
    if (!r || r->verdict == Verdict::skipped) continue;
    if (!r->ok()) {
      res.groupoid_quantale = false;
      res.failing_groupoid = name;
      break;
    }
  }

  if (!q.unital()) {
    res.inverse_quantal_frame = false;
    res.failing_iqf = "no designated unit";
    std::vector<Elt> au = abstract_units(q);
    if (!au.empty()) {
      res.note = "abstract unit " + q.lat().name(au.front()) +
                 " satisfies ex = xe = x but no unit is designated";
    }
  } else {
    const std::vector<std::string> defining = {
        "quantale.product_joins", "quantale.assoc",      "quantale.designated_unit",
        "involution.join_preserving", "involution.involutive", "involution.antihomomorphism",
        "based.base_is_frame",    "based.unital_actions", "based.module_laws",
        "based.middle_commutes",  "based.action_joins",   "based.product_compat",
        "based.involution_twist", "qframe.carrier_is_frame", "qframe.restriction_meets",
        "support.sup_map",        "support.full",         "support.cover",
        "support.restrict",       "support.equivariant",  "reflexive.frame_map",
        "reflexive.unit_trace",   "ql.inverse_law"};
    res.inverse_quantal_frame = true;
    for (const std::string& name : defining) {
      const CheckResult* r = find(name);
      if (!r || r->verdict == Verdict::skipped) continue;
      if (!r->ok()) {
        res.inverse_quantal_frame = false;
        res.failing_iqf = name;
        break;
      }
    }
    if (res.inverse_quantal_frame) {
      // multiplicativity and the unit laws are forced; re-derive them
      for (const char* name : {"mult.comult_in_tensor", "mult.comult_bottom",
                               "mult.comult_joins", "ql.unit_laws"}) {
        const CheckResult* r = find(name);
        if (r && r->verdict == Verdict::fail)
          detail.push_back(incident_result(
              std::string("iqf.rederive.") + name, q.name(),
              "the defining axioms hold, so this may not fail"));
      }
      PartialUnitsResult pu = partial_units(q);
      if (pu.join_is_top.ok())
        detail.push_back(std::move(pu.join_is_top));
      else
        detail.push_back(incident_result("iqf.partial_units_cover", q.name(),
                                         pu.join_is_top.witness));
      std::vector<CheckResult> iota = check_iota_iso(q);
      for (CheckResult& r : iota) {
        if (!r.ok())
          detail.push_back(
              incident_result("iqf." + r.name, q.name(), r.witness));
        else
          detail.push_back(std::move(r));
      }
    }
  }
  return res;
}

}  // namespace qf
