#ifndef QFORGE_SUITES_HPP
#define QFORGE_SUITES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qforge/workspace.hpp"

namespace qf {

struct SuiteOptions {
  std::string only;            // substring filter on check name or object
  std::size_t max_size = 4096; // cell guard passed to the heavy table scans
  Side side = Side::range;     // restriction side for derived quantales
  std::uint64_t seed = 0;      // sampling order in the lattice validator only
};

// exit_code: 0 all pass, 1 some check failed, 2 a derived law broke
// (incident), never influenced by skipped checks.
struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;  // sorted by (name, object), exact duplicates removed
  int exit_code = 0;
};

// The ten suite names in their fixed running order; "all" runs the other nine.
const std::vector<std::string>& suite_names();

SuiteReport run_suite(const Workspace& w, const std::string& suite, const SuiteOptions& opt = {});

}  // namespace qf

#endif
