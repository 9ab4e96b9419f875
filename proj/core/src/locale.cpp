#include "qforge/locale.hpp"

#include <algorithm>
#include <bit>

namespace qf {

FinSpace::FinSpace(std::string name, std::vector<std::string> point_names,
                   const std::vector<std::pair<Pt, Pt>>& leq_pairs)
    : name_(std::move(name)), k_(point_names.size()), pt_names_(std::move(point_names)) {
  if (k_ == 0) throw StructuralError("space " + name_ + " has no points");
  if (k_ > max_points)
    throw CapacityError("space " + name_ + " has " + std::to_string(k_) +
                        " points; guard is " + std::to_string(max_points));
  up_.assign(k_, 0);
  for (std::size_t p = 0; p < k_; ++p) up_[p] |= PtMask(1) << p;
  for (auto [p, q] : leq_pairs) {
    if (p >= k_ || q >= k_)
      throw StructuralError("space " + name_ + ": order pair references unknown point");
    up_[p] |= PtMask(1) << q;
  }
  for (std::size_t m = 0; m < k_; ++m)
    for (std::size_t p = 0; p < k_; ++p)
      if ((up_[p] >> m) & 1u) up_[p] |= up_[m];
}

bool FinSpace::t0() const {
  for (std::size_t p = 0; p < k_; ++p)
    for (std::size_t q = p + 1; q < k_; ++q)
      if (up_[p] == up_[q]) return false;
  return true;
}

std::optional<Pt> FinSpace::point_by_name(const std::string& s) const {
  for (std::size_t p = 0; p < k_; ++p)
    if (pt_names_[p] == s) return Pt(p);
  return std::nullopt;
}

bool FinSpace::is_open(PtMask s) const {
  for (std::size_t p = 0; p < k_; ++p)
    if ((s >> p) & 1u && (up_[p] & ~s)) return false;
  return true;
}

bool FinSpace::discrete() const {
  for (std::size_t p = 0; p < k_; ++p)
    if (up_[p] != (PtMask(1) << p)) return false;
  return true;
}

std::string FinSpace::mask_name(PtMask s) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t p = 0; p < k_; ++p)
    if ((s >> p) & 1u) {
      if (!first) out += ",";
      out += pt_names_[p];
      first = false;
    }
  return out + "}";
}

CMap::CMap(const FinSpace* src, const FinSpace* tgt, std::vector<Pt> table)
    : src_(src), tgt_(tgt), tab_(std::move(table)) {
  if (tab_.size() != src_->points())
    throw StructuralError("map table has " + std::to_string(tab_.size()) + " entries for " +
                          std::to_string(src_->points()) + " points");
  for (Pt v : tab_)
    if (v >= tgt_->points())
      throw StructuralError("map table references unknown target point " + std::to_string(v));
  // Alexandrov continuity: preimages of up-sets are up-sets iff monotone.
  for (std::size_t p = 0; p < src_->points(); ++p)
    for (std::size_t q = 0; q < src_->points(); ++q)
      if (src_->leq(Pt(p), Pt(q)) && !tgt_->leq(tab_[p], tab_[q]))
        throw StructuralError("map not continuous: " + src_->point_name(Pt(p)) +
                              " <= " + src_->point_name(Pt(q)) + " but images " +
                              tgt_->point_name(tab_[p]) + " !<= " + tgt_->point_name(tab_[q]));
}

PtMask CMap::image(PtMask s) const {
  PtMask out = 0;
  for (std::size_t p = 0; p < src_->points(); ++p)
    if ((s >> p) & 1u) out |= PtMask(1) << tab_[p];
  return out;
}

PtMask CMap::preimage(PtMask s) const {
  PtMask out = 0;
  for (std::size_t p = 0; p < src_->points(); ++p)
    if ((s >> tab_[p]) & 1u) out |= PtMask(1) << p;
  return out;
}

CMap CMap::identity(const FinSpace* s) {
  std::vector<Pt> t(s->points());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = Pt(i);
  return CMap(s, s, std::move(t));
}

CMap CMap::compose(const CMap& inner) const {
  if (inner.tgt_ != src_)
    throw UsageError("compose: inner target space does not match outer source space");
  std::vector<Pt> t(inner.src_->points());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = tab_[inner.tab_[i]];
  return CMap(inner.src_, tgt_, std::move(t));
}

MapClass classify_map(const CMap& f) {
  const FinSpace& s = f.src();
  const FinSpace& t = f.tgt();
  MapClass c;

  c.injective = true;
  for (std::size_t p = 0; p < s.points() && c.injective; ++p)
    for (std::size_t q = p + 1; q < s.points(); ++q)
      if (f(Pt(p)) == f(Pt(q))) { c.injective = false; break; }

  PtMask full_image = f.image(~PtMask(0) >> (32 - s.points()));
  c.surjective = std::popcount(full_image) == int(t.points());

  // Open iff the image of every minimal-open basis element is open.
  c.open = true;
  for (std::size_t p = 0; p < s.points(); ++p) {
    PtMask img = f.image(s.min_open(Pt(p)));
    if (!t.is_open(img)) {
      c.open = false;
      c.witness = "image of minimal open " + s.mask_name(s.min_open(Pt(p))) + " of point " +
                  s.point_name(Pt(p)) + " is " + t.mask_name(img) + ", not open";
      break;
    }
  }

  // Local homeomorphism: on each minimal open, f is injective, has open
  // image, and pushes relative opens to relative opens.
  c.local_homeo = true;
  for (std::size_t p = 0; p < s.points() && c.local_homeo; ++p) {
    PtMask dom = s.min_open(Pt(p));
    PtMask img = f.image(dom);
    if (!t.is_open(img)) {
      c.local_homeo = false;
      if (c.witness.empty())
        c.witness = "at point " + s.point_name(Pt(p)) + ": image of its minimal open is not open";
      break;
    }
    for (std::size_t a = 0; a < s.points(); ++a)
      for (std::size_t b = 0; b < s.points(); ++b)
        if (((dom >> a) & 1u) && ((dom >> b) & 1u) && a != b && f(Pt(a)) == f(Pt(b))) {
          c.local_homeo = false;
          if (c.witness.empty())
            c.witness = "not injective on minimal open of " + s.point_name(Pt(p)) + ": points " +
                        s.point_name(Pt(a)) + ", " + s.point_name(Pt(b)) + " collide";
        }
    if (!c.local_homeo) break;
    // Relative openness: image of each minimal open inside dom must be
    // up-closed within img.
    for (std::size_t q = 0; q < s.points(); ++q) {
      if (!((dom >> q) & 1u)) continue;
      PtMask sub_img = f.image(s.min_open(Pt(q)));
      for (std::size_t y = 0; y < t.points(); ++y)
        for (std::size_t z = 0; z < t.points(); ++z)
          if (((sub_img >> y) & 1u) && ((img >> z) & 1u) && t.leq(Pt(y), Pt(z)) &&
              !((sub_img >> z) & 1u)) {
            c.local_homeo = false;
            if (c.witness.empty())
              c.witness = "restriction to minimal open of " + s.point_name(Pt(p)) +
                          " is not open onto its image near " + t.point_name(Pt(y));
          }
      if (!c.local_homeo) break;
    }
  }

  // Regular open mono: injective, open image, homeomorphism onto the image
  // (order-embedding is enough once injective and image-open hold).
  c.regular_open_mono = c.injective && t.is_open(full_image);
  if (c.regular_open_mono)
    for (std::size_t a = 0; a < s.points() && c.regular_open_mono; ++a)
      for (std::size_t b = 0; b < s.points(); ++b)
        if (t.leq(f(Pt(a)), f(Pt(b))) && !s.leq(Pt(a), Pt(b))) {
          c.regular_open_mono = false;
          break;
        }
  return c;
}

SpatialFrame opens_of(const FinSpace& s) {
  if (s.points() > 12)
    throw CapacityError("opens_of(" + s.name() + "): 2^" + std::to_string(s.points()) +
                        " opens exceed the lattice guard");
  std::vector<PtMask> opens;
  PtMask total = s.points() == 32 ? ~PtMask(0) : ((PtMask(1) << s.points()) - 1);
  for (PtMask m = 0;; ++m) {
    if (s.is_open(m)) opens.push_back(m);
    if (m == total) break;
  }
  std::vector<std::string> names;
  names.reserve(opens.size());
  for (PtMask m : opens) names.push_back(s.mask_name(m));
  std::vector<std::pair<Elt, Elt>> leq;
  for (std::size_t a = 0; a < opens.size(); ++a)
    for (std::size_t b = 0; b < opens.size(); ++b)
      if (a != b && (opens[a] & ~opens[b]) == 0) leq.push_back({Elt(a), Elt(b)});
  SpatialFrame f;
  f.space = &s;
  f.lat = make_lattice(std::move(names), leq);
  f.mask = std::move(opens);
  return f;
}

Elt SpatialFrame::by_mask(PtMask m) const {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] == m) return Elt(i);
  throw StructuralError("open " + space->mask_name(m) + " not found in frame of " +
                        space->name());
}

Elt SpatialFrame::image_elt(const CMap& f, Elt source_elt, const SpatialFrame& src_frame) const {
  return by_mask(f.image(src_frame.mask[source_elt]));
}

SupMap inverse_image_map(const CMap& f, const SpatialFrame& tgt_frame,
                         const SpatialFrame& src_frame) {
  std::vector<Elt> tab(tgt_frame.lat->size());
  for (std::size_t e = 0; e < tab.size(); ++e)
    tab[e] = src_frame.by_mask(f.preimage(tgt_frame.mask[e]));
  return SupMap(tgt_frame.lat, src_frame.lat, std::move(tab));
}

CheckResult check_open_frame_side(const CMap& f, bool expect_open, std::string object) {
  const std::string kind = "locale.open_frame_side_agreement";
  SpatialFrame src = opens_of(f.src());
  SpatialFrame tgt = opens_of(f.tgt());
  SupMap inv = inverse_image_map(f, tgt, src);

  // Candidate left adjoint (direct image); it is join-preserving iff every
  // open's image is open, and then Frobenius must hold.
  bool ok = true;
  std::string why;
  std::vector<Elt> push(src.lat->size());
  for (std::size_t a = 0; a < src.lat->size() && ok; ++a) {
    PtMask img = f.image(src.mask[a]);
    if (!f.tgt().is_open(img)) {
      ok = false;
      why = "direct image of " + f.src().mask_name(src.mask[a]) + " is not open";
      break;
    }
    push[a] = tgt.by_mask(img);
  }
  if (ok) {
    for (std::size_t a = 0; a < src.lat->size() && ok; ++a)
      for (std::size_t b = 0; b < tgt.lat->size(); ++b) {
        Elt lhs = push[src.lat->meet(Elt(a), inv(Elt(b)))];
        Elt rhs = tgt.lat->meet(push[a], Elt(b));
        if (lhs != rhs) {
          ok = false;
          why = "projection law fails at a=" + src.lat->name(Elt(a)) +
                ", b=" + tgt.lat->name(Elt(b));
          break;
        }
      }
  }
  if (ok == expect_open) return pass_result(kind, object);
  return incident_result(kind, object,
                         expect_open ? ("point-side open but frame side fails: " + why)
                                     : "frame side admits a Frobenius left adjoint but the "
                                       "point side says not open");
}

CMap PullbackSpace::proj1() const {
  std::vector<Pt> t;
  t.reserve(pairs.size());
  for (auto& [a, b] : pairs) t.push_back(a);
  return CMap(&space, left, std::move(t));
}

CMap PullbackSpace::proj2() const {
  std::vector<Pt> t;
  t.reserve(pairs.size());
  for (auto& [a, b] : pairs) t.push_back(b);
  return CMap(&space, right, std::move(t));
}

std::optional<Pt> PullbackSpace::pair_id(Pt a, Pt b) const {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first == a && pairs[i].second == b) return Pt(i);
  return std::nullopt;
}

PullbackSpace pullback(const CMap& f, const CMap& g, std::string name) {
  if (&f.tgt() != &g.tgt()) throw UsageError("pullback: cospan targets differ");
  const FinSpace& a = f.src();
  const FinSpace& b = g.src();
  std::vector<std::pair<Pt, Pt>> pairs;
  for (std::size_t x = 0; x < a.points(); ++x)
    for (std::size_t y = 0; y < b.points(); ++y)
      if (f(Pt(x)) == g(Pt(y))) pairs.push_back({Pt(x), Pt(y)});
  if (pairs.empty())
    throw StructuralError("pullback " + name + " is empty; finite spaces here must be inhabited");
  std::vector<std::string> names;
  std::vector<std::pair<Pt, Pt>> leq;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    names.push_back("(" + a.point_name(pairs[i].first) + "," + b.point_name(pairs[i].second) +
                    ")");
    for (std::size_t j = 0; j < pairs.size(); ++j)
      if (i != j && a.leq(pairs[i].first, pairs[j].first) &&
          b.leq(pairs[i].second, pairs[j].second))
        leq.push_back({Pt(i), Pt(j)});
  }
  return PullbackSpace{FinSpace(std::move(name), std::move(names), leq), std::move(pairs), &a,
                       &b};
}

CheckResult check_pullback_universal(const PullbackSpace& p, const CMap& f, const CMap& g,
                                     const CMap& to_a, const CMap& to_b, std::string object) {
  const std::string kind = "locale.pullback_universal";
  if (&to_a.src() != &to_b.src()) throw UsageError("pullback cone legs have different apex");
  const FinSpace& t = to_a.src();
  for (std::size_t x = 0; x < t.points(); ++x)
    if (f(to_a(Pt(x))) != g(to_b(Pt(x))))
      throw UsageError("test cone does not commute with the cospan");
  std::vector<Pt> med(t.points());
  for (std::size_t x = 0; x < t.points(); ++x) {
    auto id = p.pair_id(to_a(Pt(x)), to_b(Pt(x)));
    if (!id)
      return fail_result(kind, object,
                         "no pullback point for (" + p.left->point_name(to_a(Pt(x))) + "," +
                             p.right->point_name(to_b(Pt(x))) + ")");
    med[x] = *id;
  }
  CMap h(&t, &p.space, med);  // throws if not continuous
  if (!(p.proj1().compose(h) == to_a) || !(p.proj2().compose(h) == to_b))
    return fail_result(kind, object, "mediating map does not commute with projections");
  // Uniqueness: any point function commuting with both projections equals h,
  // because the projections are jointly injective on pullback points.
  for (std::size_t i = 0; i < p.pairs.size(); ++i)
    for (std::size_t j = i + 1; j < p.pairs.size(); ++j)
      if (p.pairs[i] == p.pairs[j])
        return fail_result(kind, object, "pullback points not jointly separated");
  return pass_result(kind, object);
}

Spectrum spectrum(LatPtr frame, std::string name) {
  if (!frame->distributive())
    throw UsageError("spectrum requires a distributive lattice");
  const auto& ji = frame->join_irreducibles();
  if (ji.size() > FinSpace::max_points)
    throw CapacityError("spectrum of " + name + " has too many points");
  std::vector<std::string> names;
  for (Elt j : ji) names.push_back(frame->name(j));
  std::vector<std::pair<Pt, Pt>> leq;
  for (std::size_t a = 0; a < ji.size(); ++a)
    for (std::size_t b = 0; b < ji.size(); ++b)
      if (a != b && frame->leq(ji[b], ji[a])) leq.push_back({Pt(a), Pt(b)});
  Spectrum sp{FinSpace(std::move(name), std::move(names), leq), {}, {}};
  sp.point_elt = ji;
  sp.elt_to_mask.assign(frame->size(), 0);
  for (std::size_t e = 0; e < frame->size(); ++e)
    for (std::size_t k = 0; k < ji.size(); ++k)
      if (frame->leq(ji[k], Elt(e))) sp.elt_to_mask[e] |= PtMask(1) << k;
  return sp;
}

}  // namespace qf
