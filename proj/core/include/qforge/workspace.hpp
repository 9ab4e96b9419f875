#ifndef QFORGE_WORKSPACE_HPP
#define QFORGE_WORKSPACE_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qforge/bilocale.hpp"
#include "qforge/cover.hpp"

namespace qf {

// A workspace holds every object loaded from structure files, each wrapper
// keeping the names of the objects it was declared over so the collection
// can be written back out as text.
struct NamedGroupoid {
  std::string name;
  std::string objects;
  std::string arrows;
  FinGroupoid g;
};

struct NamedAction {
  std::string name;
  std::string groupoid;
  std::string carrier;
  GAction a;
};

struct NamedCover {
  std::string name;
  std::string base;
  std::string ghat;
  CoverData data;
};

struct NamedModule {
  std::string name;
  std::string of;
};

struct NamedBilocale {
  std::string name;
  std::string left;
  std::string right;
  Bilocale b;
};

struct Workspace {
  std::vector<std::pair<std::string, FinSpace>> spaces;
  std::vector<NamedGroupoid> groupoids;
  std::vector<std::pair<std::string, Quantale>> quantales;
  std::vector<NamedAction> actions;
  std::vector<NamedCover> covers;
  std::vector<NamedModule> modules;
  std::vector<NamedBilocale> bilocales;
  std::map<std::string, std::string> notes;

  bool has_name(const std::string& n) const;
  const FinSpace* space(const std::string& n) const;
  const NamedGroupoid* groupoid(const std::string& n) const;
  const Quantale* quantale(const std::string& n) const;
  const NamedAction* action(const std::string& n) const;
  const NamedCover* cover(const std::string& n) const;
  const NamedBilocale* bilocale(const std::string& n) const;
};

// Structural equality: same shape and same internal labels, top-level object
// names aside.
bool same_structure(const FinSpace& a, const FinSpace& b);
bool same_structure(const FinGroupoid& a, const FinGroupoid& b);
bool same_structure(const GAction& a, const GAction& b);
bool same_structure(const Quantale& a, const Quantale& b);
bool same_structure(const Workspace& a, const Workspace& b);

// Parses structure-file text into the workspace.  Errors throw UsageError
// with a "file:line:col:" prefix and the offending name.  Only structural
// shape is enforced here, so files describing law-breaking objects still
// load; the suites surface their defects.
void parse_into(Workspace& w, const std::string& text, const std::string& filename);
Workspace parse_file(const std::string& path);
void parse_file_into(Workspace& w, const std::string& path);

// Renders the workspace as structure-file text.  Parsing the output yields a
// structurally equal workspace.
std::string emit_workspace(const Workspace& w);

// Derives a new object from existing ones.  `objects` carries the result
// together with every named dependency, so emitting it gives a standalone
// file.  `what` is one of: oquantale, cover, lift, descend, tensor, orbit.
struct ConstructResult {
  Workspace objects;
  std::string name;
  std::vector<CheckResult> checks;
};

ConstructResult construct(const Workspace& w, const std::string& what,
                          const std::vector<std::string>& args,
                          Side side = Side::range);

}  // namespace qf

#endif
