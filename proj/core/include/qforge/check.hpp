#ifndef QFORGE_CHECK_HPP
#define QFORGE_CHECK_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace qf {

// Structural problems in input data (bad ids, inconsistent tables).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller misuse: missing preconditions, unknown names, bad arguments.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured size guard was exceeded.  First-class outcome, not a bug.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Verdicts for individual checks.
//   pass     - property holds on the whole (finite) quantification range
//   fail     - property violated; witness names the first counterexample
//              in fixed element-id order (lexicographically minimal)
//   incident - two independently computed routes disagree, i.e. a theorem
//              the engine relies on failed; always a bug or a broken input
//              that slipped validation
//   skipped  - a size guard kept the check from running; witness says which
enum class Verdict { pass, fail, incident, skipped };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::incident: return "incident";
    case Verdict::skipped: return "skipped";
  }
  return "?";
}

struct CheckResult {
  std::string name;     // e.g. "quantale.associativity"
  std::string object;   // e.g. "oquantale(pair2)"
  Verdict verdict = Verdict::pass;
  std::string witness;  // empty on pass

  bool ok() const { return verdict == Verdict::pass; }
};

inline CheckResult pass_result(std::string name, std::string object) {
  return CheckResult{std::move(name), std::move(object), Verdict::pass, ""};
}
inline CheckResult fail_result(std::string name, std::string object, std::string witness) {
  return CheckResult{std::move(name), std::move(object), Verdict::fail, std::move(witness)};
}
inline CheckResult incident_result(std::string name, std::string object, std::string witness) {
  return CheckResult{std::move(name), std::move(object), Verdict::incident, std::move(witness)};
}
inline CheckResult skipped_result(std::string name, std::string object, std::string reason) {
  return CheckResult{std::move(name), std::move(object), Verdict::skipped, std::move(reason)};
}

// Aggregate used by suite runners and the acceptance gate.
struct CheckList {
  std::vector<CheckResult> results;

  void add(CheckResult r) { results.push_back(std::move(r)); }
  void add(std::vector<CheckResult> rs) {
    for (auto& r : rs) results.push_back(std::move(r));
  }
  bool all_pass() const {
    for (const auto& r : results)
      if (r.verdict == Verdict::fail || r.verdict == Verdict::incident) return false;
    return true;
  }
  bool any_incident() const {
    for (const auto& r : results)
      if (r.verdict == Verdict::incident) return true;
    return false;
  }
};

}  // namespace qf

#endif
