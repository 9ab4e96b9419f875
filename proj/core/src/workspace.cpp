#include "qforge/workspace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace qf {

namespace {

struct Tok {
  std::string text;
  std::size_t col;  // 1-based
};

struct Line {
  std::size_t no;  // 1-based
  std::vector<Tok> toks;
};

// '#' opens a comment only at a token boundary; generated names such as
// disambiguated germs carry '#' inside the token.
std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::size_t line_no = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i <= n) {
    std::size_t end = text.find('\n', i);
    if (end == std::string::npos) end = n;
    Line l{line_no, {}};
    std::size_t j = i;
    while (j < end) {
      char c = text[j];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++j;
        continue;
      }
      if (c == '#') break;
      std::size_t start = j;
      while (j < end && text[j] != ' ' && text[j] != '\t' && text[j] != '\r') ++j;
      l.toks.push_back({text.substr(start, j - start), start - i + 1});
    }
    if (!l.toks.empty()) out.push_back(std::move(l));
    ++line_no;
    if (end == n) break;
    i = end + 1;
  }
  return out;
}

[[noreturn]] void fail_at(const std::string& file, std::size_t line, std::size_t col,
                          const std::string& msg) {
  throw UsageError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

bool is_section_kind(const std::string& t) {
  return t == "space" || t == "groupoid" || t == "action" || t == "cover" || t == "quantale" ||
         t == "module" || t == "bilocale";
}

struct Section {
  Line header;
  std::vector<Line> body;
};

class Parser {
 public:
  Parser(Workspace& w, std::string file) : w_(w), file_(std::move(file)) {}

  void run(const std::string& text) {
    std::vector<Line> lines = tokenize(text);
    if (lines.empty()) return;  // an empty file is an empty workspace
    const Line& first = lines.front();
    if (first.toks[0].text != "qf-format")
      fail_at(file_, first.no, first.toks[0].col, "missing qf-format header");
    if (first.toks.size() != 2 || first.toks[1].text != "1")
      fail_at(file_, first.no, first.toks[0].col, "unsupported qf-format version");

    std::optional<Section> open;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      Line& l = lines[i];
      const std::string& kw = l.toks[0].text;
      if (kw == "qf-format") fail_at(file_, l.no, l.toks[0].col, "duplicate qf-format header");
      if (kw == "note") {
        if (open) finish(*open), open.reset();
        if (l.toks.size() < 3) fail_at(file_, l.no, l.toks[0].col, "note needs a name and text");
        std::string text_joined;
        for (std::size_t t = 2; t < l.toks.size(); ++t) {
          if (t > 2) text_joined += ' ';
          text_joined += l.toks[t].text;
        }
        w_.notes[l.toks[1].text] = text_joined;
        continue;
      }
      if (is_section_kind(kw)) {
        if (open) finish(*open);
        if (l.toks.size() != 2)
          fail_at(file_, l.no, l.toks[0].col, kw + " header takes exactly one name");
        claim_name(l.toks[1].text, l);
        open = Section{l, {}};
        continue;
      }
      if (!open) fail_at(file_, l.no, l.toks[0].col, "expected a section header, got " + kw);
      open->body.push_back(std::move(l));
    }
    if (open) finish(*open);
  }

 private:
  Workspace& w_;
  std::string file_;

  void claim_name(const std::string& name, const Line& l) {
    if (w_.has_name(name))
      fail_at(file_, l.no, l.toks[1].col, "the name " + name + " is already in use");
  }

  [[noreturn]] void bad(const Line& l, const std::string& msg) {
    fail_at(file_, l.no, l.toks[0].col, msg);
  }

  const Tok& arg(const Line& l, std::size_t i, const char* shape) {
    if (i >= l.toks.size()) fail_at(file_, l.no, l.toks[0].col, std::string("expected ") + shape);
    return l.toks[i];
  }

  void expect_shape(const Line& l, std::size_t count, const char* shape) {
    if (l.toks.size() != count)
      fail_at(file_, l.no, l.toks[0].col, std::string("expected ") + shape);
  }

  void expect_lit(const Line& l, std::size_t i, const char* lit, const char* shape) {
    if (arg(l, i, shape).text != lit)
      fail_at(file_, l.no, l.toks[i].col, std::string("expected ") + shape);
  }

  std::size_t num(const Line& l, std::size_t i, std::size_t bound, const char* what) {
    const Tok& t = l.toks[i];
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || p != t.text.data() + t.text.size())
      fail_at(file_, l.no, t.col, t.text + " is not a " + what + " index");
    if (bound && v >= bound)
      fail_at(file_, l.no, t.col, what + (" index " + t.text) + " is out of range");
    return v;
  }

  void finish(const Section& s) {
    const std::string& kind = s.header.toks[0].text;
    const std::string& name = s.header.toks[1].text;
    if (kind == "space")
      finish_space(s, name);
    else if (kind == "groupoid")
      finish_groupoid(s, name);
    else if (kind == "action")
      finish_action(s, name);
    else if (kind == "cover")
      finish_cover(s, name);
    else if (kind == "quantale")
      finish_quantale(s, name);
    else if (kind == "module")
      finish_module(s, name);
    else
      finish_bilocale(s, name);
  }

  // Resolution helpers: unknown references are reported at the referencing
  // token with the offending name.
  const FinSpace& ref_space(const Line& l, std::size_t i) {
    const Tok& t = arg(l, i, "a space name");
    const FinSpace* sp = w_.space(t.text);
    if (!sp) fail_at(file_, l.no, t.col, "unknown space " + t.text);
    return *sp;
  }

  const NamedGroupoid& ref_groupoid(const Line& l, std::size_t i) {
    const Tok& t = arg(l, i, "a groupoid name");
    const NamedGroupoid* g = w_.groupoid(t.text);
    if (!g) fail_at(file_, l.no, t.col, "unknown groupoid " + t.text);
    return *g;
  }

  const NamedAction& ref_action(const Line& l, std::size_t i) {
    const Tok& t = arg(l, i, "an action name");
    const NamedAction* a = w_.action(t.text);
    if (!a) fail_at(file_, l.no, t.col, "unknown action " + t.text);
    return *a;
  }

  Pt ref_point(const FinSpace& sp, const Line& l, std::size_t i, const char* role) {
    const Tok& t = arg(l, i, "a point id");
    for (Pt p = 0; p < sp.points(); ++p)
      if (sp.point_name(p) == t.text) return p;
    fail_at(file_, l.no, t.col,
            std::string("unknown ") + role + " " + t.text + " in " + sp.name());
  }

  void finish_space(const Section& s, const std::string& name) {
    std::vector<std::string> pts;
    std::vector<std::pair<Pt, Pt>> leq;
    std::vector<const Line*> leq_lines;
    auto index_of = [&](const Line& l, std::size_t i) -> Pt {
      const Tok& t = arg(l, i, "a point id");
      for (std::size_t p = 0; p < pts.size(); ++p)
        if (pts[p] == t.text) return Pt(p);
      fail_at(file_, l.no, t.col, "unknown point " + t.text + " in " + name);
    };
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "point") {
        expect_shape(l, 2, "point <id>");
        for (const std::string& p : pts)
          if (p == l.toks[1].text)
            fail_at(file_, l.no, l.toks[1].col, "duplicate point " + p + " in " + name);
        pts.push_back(l.toks[1].text);
      } else if (kw == "leq") {
        expect_shape(l, 3, "leq <a> <b>");
        leq.emplace_back(index_of(l, 1), index_of(l, 2));
        leq_lines.push_back(&l);
      } else {
        bad(l, kw + " is not a space line");
      }
    }
    try {
      w_.spaces.emplace_back(name, FinSpace(name, pts, leq));
    } catch (const StructuralError& e) {
      fail_at(file_, s.header.no, 1, name + ": " + e.what());
    }
  }

  void finish_groupoid(const Section& s, const std::string& name) {
    std::string obj_name, arr_name;
    const FinSpace* g0 = nullptr;
    const FinSpace* g1 = nullptr;
    std::vector<Pt> d, r, m, inv, u;
    std::vector<char> declared;
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "objects") {
        expect_shape(l, 2, "objects <space>");
        g0 = &ref_space(l, 1);
        obj_name = l.toks[1].text;
      } else if (kw == "arrows") {
        expect_shape(l, 2, "arrows <space>");
        g1 = &ref_space(l, 1);
        arr_name = l.toks[1].text;
        d.assign(g1->points(), no_pt);
        r.assign(g1->points(), no_pt);
        m.assign(std::size_t(g1->points()) * g1->points(), no_pt);
        inv.assign(g1->points(), no_pt);
        declared.assign(g1->points(), 0);
      } else if (kw == "arrow") {
        if (!g0 || !g1) bad(l, "arrow lines must follow objects and arrows");
        expect_shape(l, 6, "arrow <id> : <d> -> <r>");
        expect_lit(l, 2, ":", "arrow <id> : <d> -> <r>");
        expect_lit(l, 4, "->", "arrow <id> : <d> -> <r>");
        Pt a = ref_point(*g1, l, 1, "arrow");
        if (declared[a])
          fail_at(file_, l.no, l.toks[1].col, "duplicate arrow " + l.toks[1].text + " in " + name);
        declared[a] = 1;
        d[a] = ref_point(*g0, l, 3, "object");
        r[a] = ref_point(*g0, l, 5, "object");
      } else if (kw == "mul") {
        if (!g1) bad(l, "mul lines must follow arrows");
        expect_shape(l, 5, "mul <a> <b> = <c>");
        expect_lit(l, 3, "=", "mul <a> <b> = <c>");
        Pt a = ref_point(*g1, l, 1, "arrow");
        Pt b = ref_point(*g1, l, 2, "arrow");
        Pt c = ref_point(*g1, l, 4, "arrow");
        std::size_t cell = std::size_t(a) * g1->points() + b;
        if (m[cell] != no_pt)
          fail_at(file_, l.no, l.toks[1].col, "duplicate mul line in " + name);
        m[cell] = c;
      } else if (kw == "inv") {
        if (!g1) bad(l, "inv lines must follow arrows");
        expect_shape(l, 4, "inv <a> = <b>");
        expect_lit(l, 2, "=", "inv <a> = <b>");
        inv[ref_point(*g1, l, 1, "arrow")] = ref_point(*g1, l, 3, "arrow");
      } else if (kw == "unit") {
        if (!g0 || !g1) bad(l, "unit lines must follow objects and arrows");
        expect_shape(l, 4, "unit <p> = <e>");
        expect_lit(l, 2, "=", "unit <p> = <e>");
        if (u.empty()) u.assign(g0->points(), no_pt);
        u[ref_point(*g0, l, 1, "object")] = ref_point(*g1, l, 3, "arrow");
      } else {
        bad(l, kw + " is not a groupoid line");
      }
    }
    if (!g0 || !g1) fail_at(file_, s.header.no, 1, name + ": objects and arrows are required");
    if (u.empty()) u.assign(g0->points(), no_pt);
    for (Pt a = 0; a < g1->points(); ++a)
      if (!declared[a])
        fail_at(file_, s.header.no, 1,
                name + ": arrow " + g1->point_name(a) + " has no arrow line");
    for (Pt a = 0; a < g1->points(); ++a)
      if (inv[a] == no_pt)
        fail_at(file_, s.header.no, 1, name + ": arrow " + g1->point_name(a) + " has no inv line");
    for (Pt p = 0; p < g0->points(); ++p)
      if (u[p] == no_pt)
        fail_at(file_, s.header.no, 1,
                name + ": object " + g0->point_name(p) + " has no unit line");
    for (Pt a = 0; a < g1->points(); ++a)
      for (Pt b = 0; b < g1->points(); ++b) {
        bool comp = d[a] == r[b];
        Pt prod = m[std::size_t(a) * g1->points() + b];
        if (comp && prod == no_pt)
          fail_at(file_, s.header.no, 1,
                  name + ": mul line missing for the composable pair " + g1->point_name(a) + " " +
                      g1->point_name(b));
        if (!comp && prod != no_pt)
          fail_at(file_, s.header.no, 1,
                  name + ": mul line on the non-composable pair " + g1->point_name(a) + " " +
                      g1->point_name(b));
      }
    try {
      w_.groupoids.push_back(
          {name, obj_name, arr_name, FinGroupoid(name, *g0, *g1, d, r, m, inv, u)});
    } catch (const StructuralError& e) {
      fail_at(file_, s.header.no, 1, name + ": " + e.what());
    }
  }

  void finish_action(const Section& s, const std::string& name) {
    std::string g_name, x_name;
    const NamedGroupoid* ng = nullptr;
    const FinSpace* x = nullptr;
    std::vector<Pt> p, act;
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "groupoid") {
        expect_shape(l, 2, "groupoid <name>");
        ng = &ref_groupoid(l, 1);
        g_name = l.toks[1].text;
      } else if (kw == "carrier") {
        expect_shape(l, 2, "carrier <space>");
        x = &ref_space(l, 1);
        x_name = l.toks[1].text;
        p.assign(x->points(), no_pt);
      } else if (kw == "anchor") {
        if (!ng || !x) bad(l, "anchor lines must follow groupoid and carrier");
        expect_shape(l, 4, "anchor <pt> = <unit>");
        expect_lit(l, 2, "=", "anchor <pt> = <unit>");
        p[ref_point(*x, l, 1, "point")] = ref_point(ng->g.g0(), l, 3, "object");
      } else if (kw == "act") {
        if (!ng || !x) bad(l, "act lines must follow groupoid and carrier");
        expect_shape(l, 5, "act <arrow> <pt> = <pt>");
        expect_lit(l, 3, "=", "act <arrow> <pt> = <pt>");
        if (act.empty()) act.assign(std::size_t(ng->g.arrows()) * x->points(), no_pt);
        Pt a = ref_point(ng->g.g1(), l, 1, "arrow");
        Pt v = ref_point(*x, l, 2, "point");
        if (p[v] == no_pt)
          fail_at(file_, l.no, l.toks[2].col,
                  "act line before the anchor of " + x->point_name(v));
        if (ng->g.d(a) != p[v])
          fail_at(file_, l.no, l.toks[1].col, "act line off the composable pairs in " + name);
        act[std::size_t(a) * x->points() + v] = ref_point(*x, l, 4, "point");
      } else {
        bad(l, kw + " is not an action line");
      }
    }
    if (!ng || !x) fail_at(file_, s.header.no, 1, name + ": groupoid and carrier are required");
    if (act.empty()) act.assign(std::size_t(ng->g.arrows()) * x->points(), no_pt);
    for (Pt v = 0; v < x->points(); ++v)
      if (p[v] == no_pt)
        fail_at(file_, s.header.no, 1,
                name + ": point " + x->point_name(v) + " has no anchor line");
    for (Pt a = 0; a < ng->g.arrows(); ++a)
      for (Pt v = 0; v < x->points(); ++v)
        if (ng->g.d(a) == p[v] && act[std::size_t(a) * x->points() + v] == no_pt)
          fail_at(file_, s.header.no, 1,
                  name + ": act line missing for " + ng->g.g1().point_name(a) + " at " +
                      x->point_name(v));
    try {
      w_.actions.push_back({name, g_name, x_name, GAction(name, ng->g, *x, p, act)});
    } catch (const StructuralError& e) {
      fail_at(file_, s.header.no, 1, name + ": " + e.what());
    }
  }

  void finish_cover(const Section& s, const std::string& name) {
    std::string base_name, ghat_name;
    const NamedGroupoid* base = nullptr;
    const NamedGroupoid* ghat = nullptr;
    std::vector<Pt> j0, j1;
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "of") {
        expect_shape(l, 2, "of <groupoid>");
        base = &ref_groupoid(l, 1);
        base_name = l.toks[1].text;
      } else if (kw == "ghat") {
        expect_shape(l, 2, "ghat <groupoid>");
        ghat = &ref_groupoid(l, 1);
        ghat_name = l.toks[1].text;
        j0.assign(ghat->g.units(), no_pt);
        j1.assign(ghat->g.arrows(), no_pt);
      } else if (kw == "j0") {
        if (!base || !ghat) bad(l, "j0 lines must follow of and ghat");
        expect_shape(l, 4, "j0 <unit> = <unit>");
        expect_lit(l, 2, "=", "j0 <unit> = <unit>");
        j0[ref_point(ghat->g.g0(), l, 1, "object")] = ref_point(base->g.g0(), l, 3, "object");
      } else if (kw == "j1") {
        if (!base || !ghat) bad(l, "j1 lines must follow of and ghat");
        expect_shape(l, 4, "j1 <arrow> = <arrow>");
        expect_lit(l, 2, "=", "j1 <arrow> = <arrow>");
        j1[ref_point(ghat->g.g1(), l, 1, "arrow")] = ref_point(base->g.g1(), l, 3, "arrow");
      } else {
        bad(l, kw + " is not a cover line");
      }
    }
    if (!base || !ghat) fail_at(file_, s.header.no, 1, name + ": of and ghat are required");
    for (Pt p = 0; p < ghat->g.units(); ++p)
      if (j0[p] == no_pt)
        fail_at(file_, s.header.no, 1,
                name + ": object " + ghat->g.g0().point_name(p) + " has no j0 line");
    for (Pt a = 0; a < ghat->g.arrows(); ++a)
      if (j1[a] == no_pt)
        fail_at(file_, s.header.no, 1,
                name + ": arrow " + ghat->g.g1().point_name(a) + " has no j1 line");
    w_.covers.push_back({name, base_name, ghat_name, CoverData{ghat->g, j0, j1}});
  }

  void finish_quantale(const Section& s, const std::string& name) {
    std::vector<std::string> elts, belts;
    std::vector<std::pair<Elt, Elt>> leq, bleq;
    std::vector<std::array<std::size_t, 3>> muls, lres_l, rres_l;
    std::vector<std::array<std::size_t, 2>> stars, spps, upss;
    std::size_t unit = std::size_t(no_elt);
    // First pass collects the element lists so index bounds are known.
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "element" || kw == "belt") {
        std::vector<std::string>& list = kw == "element" ? elts : belts;
        if (l.toks.size() < 3) bad(l, "expected " + kw + " <idx> <name>");
        std::size_t idx = num(l, 1, 0, "element");
        if (idx != list.size())
          fail_at(file_, l.no, l.toks[1].col,
                  kw + " indices must be dense and ascending in " + name);
        std::string disp;
        for (std::size_t t = 2; t < l.toks.size(); ++t) {
          if (t > 2) disp += ' ';
          disp += l.toks[t].text;
        }
        list.push_back(disp);
      }
    }
    if (elts.empty()) fail_at(file_, s.header.no, 1, name + ": element lines are required");
    auto q_idx = [&](const Line& l, std::size_t i) { return num(l, i, elts.size(), "element"); };
    auto b_idx = [&](const Line& l, std::size_t i) { return num(l, i, belts.size(), "base"); };
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "element" || kw == "belt") continue;
      if (kw == "leq") {
        expect_shape(l, 3, "leq <i> <j>");
        leq.emplace_back(Elt(q_idx(l, 1)), Elt(q_idx(l, 2)));
      } else if (kw == "bleq") {
        expect_shape(l, 3, "bleq <i> <j>");
        bleq.emplace_back(Elt(b_idx(l, 1)), Elt(b_idx(l, 2)));
      } else if (kw == "mul") {
        expect_shape(l, 5, "mul <i> <j> = <k>");
        expect_lit(l, 3, "=", "mul <i> <j> = <k>");
        muls.push_back({q_idx(l, 1), q_idx(l, 2), q_idx(l, 4)});
      } else if (kw == "star") {
        expect_shape(l, 4, "star <i> = <j>");
        expect_lit(l, 2, "=", "star <i> = <j>");
        stars.push_back({q_idx(l, 1), q_idx(l, 3)});
      } else if (kw == "unit") {
        expect_shape(l, 2, "unit <i>");
        if (unit != std::size_t(no_elt))
          fail_at(file_, l.no, l.toks[0].col, "duplicate unit line in " + name);
        unit = q_idx(l, 1);
      } else if (kw == "lres") {
        expect_shape(l, 5, "lres <b> <x> = <y>");
        expect_lit(l, 3, "=", "lres <b> <x> = <y>");
        lres_l.push_back({b_idx(l, 1), q_idx(l, 2), q_idx(l, 4)});
      } else if (kw == "rres") {
        expect_shape(l, 5, "rres <x> <b> = <y>");
        expect_lit(l, 3, "=", "rres <x> <b> = <y>");
        rres_l.push_back({q_idx(l, 1), b_idx(l, 2), q_idx(l, 4)});
      } else if (kw == "spp") {
        expect_shape(l, 4, "spp <x> = <b>");
        expect_lit(l, 2, "=", "spp <x> = <b>");
        spps.push_back({q_idx(l, 1), b_idx(l, 3)});
      } else if (kw == "ups") {
        expect_shape(l, 4, "ups <x> = <b>");
        expect_lit(l, 2, "=", "ups <x> = <b>");
        upss.push_back({q_idx(l, 1), b_idx(l, 3)});
      } else {
        bad(l, kw + " is not a quantale line");
      }
    }
    const std::size_t n = elts.size();
    std::vector<Elt> mult(n * n, no_elt), invol(n, no_elt);
    for (const auto& t : muls) mult[t[0] * n + t[1]] = Elt(t[2]);
    for (const auto& t : stars) invol[t[0]] = Elt(t[1]);
    for (std::size_t i = 0; i < n; ++i) {
      if (invol[i] == no_elt)
        fail_at(file_, s.header.no, 1, name + ": star line missing for element " +
                                           std::to_string(i));
      for (std::size_t j = 0; j < n; ++j)
        if (mult[i * n + j] == no_elt)
          fail_at(file_, s.header.no, 1, name + ": mul line missing for (" + std::to_string(i) +
                                             ", " + std::to_string(j) + ")");
    }
    bool has_base = !belts.empty();
    if (!has_base && (!lres_l.empty() || !rres_l.empty() || !spps.empty() || !upss.empty()))
      fail_at(file_, s.header.no, 1, name + ": base tables need belt lines");
    try {
      LatPtr lat = make_lattice(elts, leq);
      Quantale q(name, lat, std::move(mult), std::move(invol),
                 unit == std::size_t(no_elt) ? no_elt : Elt(unit));
      if (has_base) {
        const std::size_t nb = belts.size();
        std::vector<Elt> lr(nb * n, no_elt), rr(n * nb, no_elt);
        for (const auto& t : lres_l) lr[t[0] * n + t[1]] = Elt(t[2]);
        for (const auto& t : rres_l) rr[t[0] * nb + t[1]] = Elt(t[2]);
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t x = 0; x < n; ++x)
            if (lr[b * n + x] == no_elt || rr[x * nb + b] == no_elt)
              fail_at(file_, s.header.no, 1,
                      name + ": lres and rres must cover every base and element pair");
        q.attach_base({make_lattice(belts, bleq), std::move(lr), std::move(rr)});
        if (!spps.empty()) {
          std::vector<Elt> spp(n, no_elt);
          for (const auto& t : spps) spp[t[0]] = Elt(t[1]);
          for (std::size_t x = 0; x < n; ++x)
            if (spp[x] == no_elt)
              fail_at(file_, s.header.no, 1,
                      name + ": spp line missing for element " + std::to_string(x));
          q.attach_support(std::move(spp));
        }
        if (!upss.empty()) {
          std::vector<Elt> ups(n, no_elt);
          for (const auto& t : upss) ups[t[0]] = Elt(t[1]);
          for (std::size_t x = 0; x < n; ++x)
            if (ups[x] == no_elt)
              fail_at(file_, s.header.no, 1,
                      name + ": ups line missing for element " + std::to_string(x));
          q.attach_upsilon(std::move(ups));
        }
      }
      w_.quantales.emplace_back(name, std::move(q));
    } catch (const StructuralError& e) {
      fail_at(file_, s.header.no, 1, name + ": " + e.what());
    }
  }

  void finish_module(const Section& s, const std::string& name) {
    std::string of;
    for (const Line& l : s.body) {
      if (l.toks[0].text == "of") {
        expect_shape(l, 2, "of <action>");
        ref_action(l, 1);
        of = l.toks[1].text;
      } else {
        bad(l, l.toks[0].text + " is not a module line");
      }
    }
    if (of.empty()) fail_at(file_, s.header.no, 1, name + ": of is required");
    w_.modules.push_back({name, of});
  }

  void finish_bilocale(const Section& s, const std::string& name) {
    std::string left, right;
    const NamedAction* la = nullptr;
    const NamedAction* ra = nullptr;
    for (const Line& l : s.body) {
      const std::string& kw = l.toks[0].text;
      if (kw == "left") {
        expect_shape(l, 2, "left <action>");
        la = &ref_action(l, 1);
        left = l.toks[1].text;
      } else if (kw == "right") {
        expect_shape(l, 2, "right <action>");
        ra = &ref_action(l, 1);
        right = l.toks[1].text;
      } else {
        bad(l, kw + " is not a bilocale line");
      }
    }
    if (!la || !ra) fail_at(file_, s.header.no, 1, name + ": left and right are required");
    try {
      w_.bilocales.push_back({name, left, right, make_bilocale(name, la->a, ra->a)});
    } catch (const StructuralError& e) {
      fail_at(file_, s.header.no, 1, name + ": " + e.what());
    }
  }
};

}  // namespace

bool Workspace::has_name(const std::string& n) const {
  return space(n) || groupoid(n) || quantale(n) || action(n) || cover(n) || bilocale(n) ||
         std::any_of(modules.begin(), modules.end(),
                     [&](const NamedModule& m) { return m.name == n; });
}

const FinSpace* Workspace::space(const std::string& n) const {
  for (const auto& [name, sp] : spaces)
    if (name == n) return &sp;
  return nullptr;
}

const NamedGroupoid* Workspace::groupoid(const std::string& n) const {
  for (const auto& g : groupoids)
    if (g.name == n) return &g;
  return nullptr;
}

const Quantale* Workspace::quantale(const std::string& n) const {
  for (const auto& [name, q] : quantales)
    if (name == n) return &q;
  return nullptr;
}

const NamedAction* Workspace::action(const std::string& n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

const NamedCover* Workspace::cover(const std::string& n) const {
  for (const auto& c : covers)
    if (c.name == n) return &c;
  return nullptr;
}

const NamedBilocale* Workspace::bilocale(const std::string& n) const {
  for (const auto& b : bilocales)
    if (b.name == n) return &b;
  return nullptr;
}

void parse_into(Workspace& w, const std::string& text, const std::string& filename) {
  Parser(w, filename).run(text);
}

Workspace parse_file(const std::string& path) {
  Workspace w;
  parse_file_into(w, path);
  return w;
}

void parse_file_into(Workspace& w, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  parse_into(w, buf.str(), path);
}

bool same_structure(const FinSpace& a, const FinSpace& b) {
  if (a.points() != b.points()) return false;
  for (Pt p = 0; p < a.points(); ++p) {
    if (a.point_name(p) != b.point_name(p)) return false;
    for (Pt q = 0; q < a.points(); ++q)
      if (a.leq(p, q) != b.leq(p, q)) return false;
  }
  return true;
}

bool same_structure(const FinGroupoid& a, const FinGroupoid& b) {
  return same_structure(a.g0(), b.g0()) && same_structure(a.g1(), b.g1()) &&
         a.d_table() == b.d_table() && a.r_table() == b.r_table() &&
         a.m_table() == b.m_table() && a.i_table() == b.i_table() && a.u_table() == b.u_table();
}

bool same_structure(const GAction& a, const GAction& b) {
  return same_structure(a.g(), b.g()) && same_structure(a.x(), b.x()) &&
         a.p_table() == b.p_table() && a.act_table() == b.act_table();
}

namespace {

bool same_lattice(const SupLattice& a, const SupLattice& b) {
  if (a.size() != b.size()) return false;
  for (Elt x = 0; x < a.size(); ++x) {
    if (a.name(x) != b.name(x)) return false;
    for (Elt y = 0; y < a.size(); ++y)
      if (a.leq(x, y) != b.leq(x, y)) return false;
  }
  return true;
}

}  // namespace

bool same_structure(const Quantale& a, const Quantale& b) {
  if (!same_lattice(a.lat(), b.lat())) return false;
  const std::size_t n = a.size();
  for (Elt x = 0; x < n; ++x) {
    if (a.star(x) != b.star(x)) return false;
    for (Elt y = 0; y < n; ++y)
      if (a.mul(x, y) != b.mul(x, y)) return false;
  }
  if (a.unital() != b.unital()) return false;
  if (a.unital() && a.unit() != b.unit()) return false;
  if (a.has_base() != b.has_base()) return false;
  if (a.has_base()) {
    if (!same_lattice(*a.base_ptr(), *b.base_ptr())) return false;
    for (Elt u = 0; u < a.base_ptr()->size(); ++u)
      for (Elt x = 0; x < n; ++x)
        if (a.lres(u, x) != b.lres(u, x) || a.rres(x, u) != b.rres(x, u)) return false;
  }
  if (a.has_support() != b.has_support()) return false;
  if (a.has_support() && a.support_table() != b.support_table()) return false;
  if (a.has_upsilon() != b.has_upsilon()) return false;
  if (a.has_upsilon() && a.upsilon_table() != b.upsilon_table()) return false;
  return true;
}

bool same_structure(const Workspace& a, const Workspace& b) {
  if (a.spaces.size() != b.spaces.size() || a.groupoids.size() != b.groupoids.size() ||
      a.quantales.size() != b.quantales.size() || a.actions.size() != b.actions.size() ||
      a.covers.size() != b.covers.size() || a.modules.size() != b.modules.size() ||
      a.bilocales.size() != b.bilocales.size() || a.notes != b.notes)
    return false;
  for (std::size_t i = 0; i < a.spaces.size(); ++i)
    if (a.spaces[i].first != b.spaces[i].first ||
        !same_structure(a.spaces[i].second, b.spaces[i].second))
      return false;
  for (std::size_t i = 0; i < a.groupoids.size(); ++i) {
    const NamedGroupoid& x = a.groupoids[i];
    const NamedGroupoid& y = b.groupoids[i];
    if (x.name != y.name || x.objects != y.objects || x.arrows != y.arrows ||
        !same_structure(x.g, y.g))
      return false;
  }
  for (std::size_t i = 0; i < a.quantales.size(); ++i)
    if (a.quantales[i].first != b.quantales[i].first ||
        !same_structure(a.quantales[i].second, b.quantales[i].second))
      return false;
  for (std::size_t i = 0; i < a.actions.size(); ++i) {
    const NamedAction& x = a.actions[i];
    const NamedAction& y = b.actions[i];
    if (x.name != y.name || x.groupoid != y.groupoid || x.carrier != y.carrier ||
        !same_structure(x.a, y.a))
      return false;
  }
  for (std::size_t i = 0; i < a.covers.size(); ++i) {
    const NamedCover& x = a.covers[i];
    const NamedCover& y = b.covers[i];
    if (x.name != y.name || x.base != y.base || x.ghat != y.ghat ||
        !same_structure(x.data.ghat, y.data.ghat) || x.data.j0 != y.data.j0 ||
        x.data.j1 != y.data.j1)
      return false;
  }
  for (std::size_t i = 0; i < a.modules.size(); ++i)
    if (a.modules[i].name != b.modules[i].name || a.modules[i].of != b.modules[i].of)
      return false;
  for (std::size_t i = 0; i < a.bilocales.size(); ++i) {
    const NamedBilocale& x = a.bilocales[i];
    const NamedBilocale& y = b.bilocales[i];
    if (x.name != y.name || x.left != y.left || x.right != y.right) return false;
  }
  return true;
}

namespace {

void emit_space(std::ostream& os, const std::string& name, const FinSpace& sp) {
  os << "space " << name << "\n";
  for (Pt p = 0; p < sp.points(); ++p) os << "  point " << sp.point_name(p) << "\n";
  for (Pt p = 0; p < sp.points(); ++p)
    for (Pt q = 0; q < sp.points(); ++q)
      if (p != q && sp.leq(p, q))
        os << "  leq " << sp.point_name(p) << " " << sp.point_name(q) << "\n";
  os << "\n";
}

void emit_groupoid(std::ostream& os, const NamedGroupoid& ng) {
  const FinGroupoid& g = ng.g;
  const FinSpace& s0 = g.g0();
  const FinSpace& s1 = g.g1();
  os << "groupoid " << ng.name << "\n";
  os << "  objects " << ng.objects << "\n";
  os << "  arrows " << ng.arrows << "\n";
  for (Pt a = 0; a < g.arrows(); ++a)
    os << "  arrow " << s1.point_name(a) << " : " << s0.point_name(g.d(a)) << " -> "
       << s0.point_name(g.r(a)) << "\n";
  for (Pt a = 0; a < g.arrows(); ++a)
    for (Pt b = 0; b < g.arrows(); ++b)
      if (g.composable(a, b))
        os << "  mul " << s1.point_name(a) << " " << s1.point_name(b) << " = "
           << s1.point_name(g.m(a, b)) << "\n";
  for (Pt a = 0; a < g.arrows(); ++a)
    os << "  inv " << s1.point_name(a) << " = " << s1.point_name(g.inv(a)) << "\n";
  for (Pt p = 0; p < g.units(); ++p)
    os << "  unit " << s0.point_name(p) << " = " << s1.point_name(g.unit(p)) << "\n";
  os << "\n";
}

void emit_action(std::ostream& os, const NamedAction& na) {
  const GAction& a = na.a;
  const FinSpace& x = a.x();
  const FinSpace& s1 = a.g().g1();
  os << "action " << na.name << "\n";
  os << "  groupoid " << na.groupoid << "\n";
  os << "  carrier " << na.carrier << "\n";
  for (Pt v = 0; v < x.points(); ++v)
    os << "  anchor " << x.point_name(v) << " = " << a.g().g0().point_name(a.p(v)) << "\n";
  for (Pt g1 = 0; g1 < a.g().arrows(); ++g1)
    for (Pt v = 0; v < x.points(); ++v)
      if (a.composable(g1, v))
        os << "  act " << s1.point_name(g1) << " " << x.point_name(v) << " = "
           << x.point_name(a.apply(g1, v)) << "\n";
  os << "\n";
}

void emit_cover(std::ostream& os, const NamedCover& nc, const Workspace& w) {
  const NamedGroupoid* base = w.groupoid(nc.base);
  const FinGroupoid& gh = nc.data.ghat;
  os << "cover " << nc.name << "\n";
  os << "  of " << nc.base << "\n";
  os << "  ghat " << nc.ghat << "\n";
  for (Pt p = 0; p < gh.units(); ++p)
    os << "  j0 " << gh.g0().point_name(p) << " = " << base->g.g0().point_name(nc.data.j0[p])
       << "\n";
  for (Pt a = 0; a < gh.arrows(); ++a)
    os << "  j1 " << gh.g1().point_name(a) << " = " << base->g.g1().point_name(nc.data.j1[a])
       << "\n";
  os << "\n";
}

void emit_quantale(std::ostream& os, const std::string& name, const Quantale& q) {
  const SupLattice& l = q.lat();
  os << "quantale " << name << "\n";
  for (Elt x = 0; x < l.size(); ++x) os << "  element " << x << " " << l.name(x) << "\n";
  for (Elt x = 0; x < l.size(); ++x)
    for (Elt y = 0; y < l.size(); ++y)
      if (x != y && l.leq(x, y)) os << "  leq " << x << " " << y << "\n";
  for (Elt x = 0; x < l.size(); ++x)
    for (Elt y = 0; y < l.size(); ++y)
      os << "  mul " << x << " " << y << " = " << q.mul(x, y) << "\n";
  for (Elt x = 0; x < l.size(); ++x) os << "  star " << x << " = " << q.star(x) << "\n";
  if (q.unital()) os << "  unit " << q.unit() << "\n";
  if (q.has_base()) {
    const SupLattice& b = *q.base_ptr();
    for (Elt u = 0; u < b.size(); ++u) os << "  belt " << u << " " << b.name(u) << "\n";
    for (Elt u = 0; u < b.size(); ++u)
      for (Elt v = 0; v < b.size(); ++v)
        if (u != v && b.leq(u, v)) os << "  bleq " << u << " " << v << "\n";
    for (Elt u = 0; u < b.size(); ++u)
      for (Elt x = 0; x < l.size(); ++x)
        os << "  lres " << u << " " << x << " = " << q.lres(u, x) << "\n";
    for (Elt x = 0; x < l.size(); ++x)
      for (Elt u = 0; u < b.size(); ++u)
        os << "  rres " << x << " " << u << " = " << q.rres(x, u) << "\n";
    if (q.has_support())
      for (Elt x = 0; x < l.size(); ++x) os << "  spp " << x << " = " << q.spp(x) << "\n";
    if (q.has_upsilon())
      for (Elt x = 0; x < l.size(); ++x) os << "  ups " << x << " = " << q.upsilon(x) << "\n";
  }
  os << "\n";
}

}  // namespace

std::string emit_workspace(const Workspace& w) {
  std::ostringstream os;
  os << "qf-format 1\n\n";
  for (const auto& [name, sp] : w.spaces) emit_space(os, name, sp);
  for (const auto& ng : w.groupoids) emit_groupoid(os, ng);
  for (const auto& [name, q] : w.quantales) emit_quantale(os, name, q);
  for (const auto& nc : w.covers) emit_cover(os, nc, w);
  for (const auto& na : w.actions) emit_action(os, na);
  for (const auto& nm : w.modules)
    os << "module " << nm.name << "\n  of " << nm.of << "\n\n";
  for (const auto& nb : w.bilocales)
    os << "bilocale " << nb.name << "\n  left " << nb.left << "\n  right " << nb.right << "\n\n";
  for (const auto& [name, text] : w.notes) os << "note " << name << " " << text << "\n";
  return os.str();
}

namespace {

void copy_space(Workspace& dst, const Workspace& src, const std::string& name) {
  if (dst.space(name)) return;
  const FinSpace* sp = src.space(name);
  if (!sp) throw UsageError("construct: unknown space " + name);
  dst.spaces.emplace_back(name, *sp);
}

void copy_groupoid(Workspace& dst, const Workspace& src, const std::string& name) {
  if (dst.groupoid(name)) return;
  const NamedGroupoid* g = src.groupoid(name);
  if (!g) throw UsageError("construct: unknown groupoid " + name);
  copy_space(dst, src, g->objects);
  copy_space(dst, src, g->arrows);
  dst.groupoids.push_back(*g);
}

void copy_action(Workspace& dst, const Workspace& src, const std::string& name) {
  if (dst.action(name)) return;
  const NamedAction* a = src.action(name);
  if (!a) throw UsageError("construct: unknown action " + name);
  copy_groupoid(dst, src, a->groupoid);
  copy_space(dst, src, a->carrier);
  dst.actions.push_back(*a);
}

void copy_cover(Workspace& dst, const Workspace& src, const std::string& name) {
  if (dst.cover(name)) return;
  const NamedCover* c = src.cover(name);
  if (!c) throw UsageError("construct: unknown cover " + name);
  copy_groupoid(dst, src, c->base);
  copy_groupoid(dst, src, c->ghat);
  dst.covers.push_back(*c);
}

const NamedGroupoid& want_groupoid(const Workspace& w, const std::vector<std::string>& args,
                                   std::size_t i) {
  if (i >= args.size()) throw UsageError("construct: missing groupoid argument");
  const NamedGroupoid* g = w.groupoid(args[i]);
  if (!g) throw UsageError("construct: unknown groupoid " + args[i]);
  return *g;
}

std::string fresh_name(const Workspace& w, const std::vector<std::string>& args, std::size_t i,
                       const std::string& fallback) {
  std::string name = i < args.size() ? args[i] : fallback;
  if (w.has_name(name)) throw UsageError("construct: the name " + name + " is already in use");
  return name;
}

}  // namespace

ConstructResult construct(const Workspace& w, const std::string& what,
                          const std::vector<std::string>& args, Side side) {
  ConstructResult out;
  if (what == "oquantale") {
    const NamedGroupoid& ng = want_groupoid(w, args, 0);
    out.name = fresh_name(w, args, 1, ng.name + ".oq");
    Quantale q = oquantale(ng.g, side);
    out.checks = validate_quantale(q, packages_present(q));
    out.objects.quantales.emplace_back(out.name, std::move(q));
  } else if (what == "cover") {
    const NamedGroupoid& ng = want_groupoid(w, args, 0);
    out.name = fresh_name(w, args, 1, ng.name + ".cover");
    GermCoverResult gc = germ_cover(ng.g);
    out.checks.push_back(gc.coverable);
    if (!gc.cover) {
      out.name.clear();  // the base has no etale cover; the check carries why
      return out;
    }
    std::string ghat_name = out.name + ".ghat";
    std::string arr_name = out.name + ".arrows";
    if (w.has_name(ghat_name) || w.has_name(arr_name))
      throw UsageError("construct: the name " + ghat_name + " is already in use");
    copy_groupoid(out.objects, w, ng.name);
    out.objects.spaces.emplace_back(arr_name, gc.cover->ghat.g1());
    out.objects.groupoids.push_back({ghat_name, ng.objects, arr_name, gc.cover->ghat});
    out.objects.covers.push_back({out.name, ng.name, ghat_name, *gc.cover});
    GroupoidReport rep = validate_groupoid(gc.cover->ghat);
    out.checks.insert(out.checks.end(), rep.checks.begin(), rep.checks.end());
  } else if (what == "lift") {
    if (args.size() < 2) throw UsageError("construct: lift needs an action and a cover");
    const NamedAction* na = w.action(args[0]);
    if (!na) throw UsageError("construct: unknown action " + args[0]);
    const NamedCover* nc = w.cover(args[1]);
    if (!nc) throw UsageError("construct: unknown cover " + args[1]);
    out.name = fresh_name(w, args, 2, na->name + ".lift");
    GAction lifted = lift_action(na->a, nc->data);
    out.checks = validate_action(lifted);
    copy_groupoid(out.objects, w, nc->ghat);
    copy_space(out.objects, w, na->carrier);
    out.objects.actions.push_back({out.name, nc->ghat, na->carrier, std::move(lifted)});
  } else if (what == "descend") {
    if (args.size() < 2) throw UsageError("construct: descend needs an action and a cover");
    const NamedAction* na = w.action(args[0]);
    if (!na) throw UsageError("construct: unknown action " + args[0]);
    const NamedCover* nc = w.cover(args[1]);
    if (!nc) throw UsageError("construct: unknown cover " + args[1]);
    const NamedGroupoid* base = w.groupoid(nc->base);
    out.name = fresh_name(w, args, 2, na->name + ".descend");
    CoverAssembly ca = assemble_cover(base->g, nc->data);
    DescentResult dr = check_descent(na->a, ca);
    out.checks = dr.checks;
    out.checks.push_back(dr.verdict);
    if (!dr.descended) {
      out.name.clear();  // no descent; the verdict carries the witness
      return out;
    }
    copy_groupoid(out.objects, w, nc->base);
    copy_space(out.objects, w, na->carrier);
    out.objects.actions.push_back({out.name, nc->base, na->carrier, *dr.descended});
  } else if (what == "tensor") {
    if (args.size() < 2) throw UsageError("construct: tensor needs two bilocales");
    const NamedBilocale* b1 = w.bilocale(args[0]);
    if (!b1) throw UsageError("construct: unknown bilocale " + args[0]);
    const NamedBilocale* b2 = w.bilocale(args[1]);
    if (!b2) throw UsageError("construct: unknown bilocale " + args[1]);
    out.name = fresh_name(w, args, 2, b1->name + "x" + b2->name);
    ComposeResult cr = tensor_compose(b1->b, b2->b);
    out.checks = cr.checks;
    const NamedAction* la = w.action(b1->left);
    const NamedAction* ra = w.action(b2->right);
    std::string carrier = out.name + ".carrier";
    std::string lname = out.name + ".l";
    std::string rname = out.name + ".r";
    if (w.has_name(carrier) || w.has_name(lname) || w.has_name(rname))
      throw UsageError("construct: the name " + carrier + " is already in use");
    copy_groupoid(out.objects, w, la->groupoid);
    copy_groupoid(out.objects, w, ra->groupoid);
    out.objects.spaces.emplace_back(carrier, cr.composite.x());
    out.objects.actions.push_back({lname, la->groupoid, carrier, cr.composite.left});
    out.objects.actions.push_back({rname, ra->groupoid, carrier, cr.composite.right});
    out.objects.bilocales.push_back(
        {out.name, lname, rname, make_bilocale(out.name, cr.composite.left, cr.composite.right)});
  } else if (what == "orbit") {
    if (args.empty()) throw UsageError("construct: orbit needs an action");
    const NamedAction* na = w.action(args[0]);
    if (!na) throw UsageError("construct: unknown action " + args[0]);
    out.name = fresh_name(w, args, 1, na->name + ".orbit");
    GermCoverResult gc = germ_cover(na->a.g());
    out.checks.push_back(gc.coverable);
    if (!gc.cover) {
      out.name.clear();
      return out;
    }
    OrbitResult orb = invariants_and_orbit(na->a, *gc.cover);
    out.checks.insert(out.checks.end(), orb.checks.begin(), orb.checks.end());
    const GAction& a = na->a;
    const FinSpace& x = a.x();
    std::vector<Pt> cls(x.points());
    for (Pt v = 0; v < x.points(); ++v) cls[v] = v;
    auto root = [&](Pt v) {
      while (cls[v] != v) v = cls[v] = cls[cls[v]];
      return v;
    };
    for (Pt g1 = 0; g1 < a.g().arrows(); ++g1)
      for (Pt v = 0; v < x.points(); ++v)
        if (a.composable(g1, v)) {
          Pt p = root(v), q = root(a.apply(g1, v));
          if (p != q) cls[std::max(p, q)] = std::min(p, q);
        }
    std::vector<Pt> reps;
    for (Pt v = 0; v < x.points(); ++v)
      if (root(v) == v) reps.push_back(v);
    auto cls_of = [&](Pt v) {
      return Pt(std::lower_bound(reps.begin(), reps.end(), root(v)) - reps.begin());
    };
    std::vector<std::string> names(reps.size());
    for (std::size_t c = 0; c < reps.size(); ++c) names[c] = x.point_name(reps[c]);
    std::vector<std::pair<Pt, Pt>> leq;
    for (Pt v = 0; v < x.points(); ++v)
      for (Pt u = 0; u < x.points(); ++u)
        if (x.leq(v, u)) leq.emplace_back(cls_of(v), cls_of(u));
    FinSpace quot(out.name, names, leq);
    // The quotient space must carry exactly the invariant opens.
    SpatialFrame qf_frame = opens_of(quot);
    std::string wtn;
    if (qf_frame.lat->size() != orb.orbit->size())
      wtn = "the quotient space has " + std::to_string(qf_frame.lat->size()) +
            " opens for an orbit frame of " + std::to_string(orb.orbit->size());
    out.checks.push_back(wtn.empty() ? pass_result("construct.orbit", out.name)
                                     : incident_result("construct.orbit", out.name, wtn));
    out.objects.spaces.emplace_back(out.name, std::move(quot));
  } else {
    throw UsageError("construct: unknown operation " + what);
  }
  return out;
}

}  // namespace qf
