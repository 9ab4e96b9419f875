#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qforge/suites.hpp"

namespace {

using qf::CheckResult;
using qf::Verdict;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qf::UsageError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::ordered_json check_json(const CheckResult& c) {
  return {{"name", c.name},
          {"object", c.object},
          {"verdict", qf::verdict_name(c.verdict)},
          {"witness", c.witness}};
}

struct Counts {
  std::size_t pass = 0, fail = 0, incident = 0, skipped = 0;
};

Counts count(const std::vector<CheckResult>& checks) {
  Counts n;
  for (const CheckResult& c : checks) switch (c.verdict) {
      case Verdict::pass: ++n.pass; break;
      case Verdict::fail: ++n.fail; break;
      case Verdict::incident: ++n.incident; break;
      case Verdict::skipped: ++n.skipped; break;
    }
  return n;
}

void print_summary(const std::string& head, const std::vector<CheckResult>& checks,
                   int exit_code) {
  Counts n = count(checks);
  std::cout << head << "\n";
  std::cout << "  pass " << n.pass << "  fail " << n.fail << "  incident " << n.incident
            << "  skipped " << n.skipped << "\n";
  std::size_t shown = 0;
  for (const CheckResult& c : checks) {
    if (c.verdict != Verdict::fail && c.verdict != Verdict::incident) continue;
    if (++shown > 25) {
      std::cout << "  ... more red checks in the report file\n";
      break;
    }
    std::cout << "  " << (c.verdict == Verdict::incident ? "INCIDENT " : "FAIL ") << c.name
              << " at " << c.object << ": " << c.witness << "\n";
  }
  const char* verdict = exit_code == 0   ? "pass"
                        : exit_code == 1 ? "fail"
                                         : "incident";
  std::cout << "verdict: " << verdict << " (exit " << exit_code << ")\n";
}

void write_report(nlohmann::ordered_json& report, const std::vector<CheckResult>& checks,
                  long long elapsed_ms, int exit_code) {
  Counts n = count(checks);
  report["counts"] = {{"pass", n.pass},
                      {"fail", n.fail},
                      {"incident", n.incident},
                      {"skipped", n.skipped}};
  report["exit_code"] = exit_code;
  report["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : checks) report["checks"].push_back(check_json(c));
  report["elapsed_ms"] = elapsed_ms;

  const char* dir = std::getenv("QF_REPORT_DIR");
  std::filesystem::path out = dir ? dir : ".";
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  out /= "qf-report.json";
  std::ofstream os(out);
  os << report.dump(2) << "\n";
  if (!os) std::cerr << "warning: could not write " << out.string() << "\n";
}

int check_exit(const std::vector<CheckResult>& checks) {
  int code = 0;
  for (const CheckResult& c : checks) {
    if (c.verdict == Verdict::incident) return 2;
    if (c.verdict == Verdict::fail) code = 1;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite verification engine for groupoid quantales and their covers"};
  app.footer("exit codes: 0 all checks pass, 1 a check failed, 2 a derived law broke,\n"
             "3 usage or parse error");

  std::vector<std::string> files;
  std::string suite, what, emit_path, only, convention = "r";
  std::vector<std::string> with;
  std::size_t max_size = 4096;
  std::uint64_t seed = 0;

  app.add_option("files", files, "structure files to load");
  auto* so = app.add_option("--suite", suite, "check suite to run")
                 ->check(CLI::IsMember(qf::suite_names()));
  auto* co = app.add_option("--construct", what,
                            "derive a new object: oquantale, cover, lift, descend, tensor, orbit")
                 ->check(CLI::IsMember(
                     {"oquantale", "cover", "lift", "descend", "tensor", "orbit"}));
  so->excludes(co);
  co->excludes(so);
  app.add_option("--with", with, "arguments for --construct, in order (repeatable)");
  app.add_option("--only", only, "keep only checks whose name or object contains this");
  app.add_option("--emit", emit_path, "write the workspace (or constructed objects) here");
  app.add_option("--max-size", max_size, "cell guard for the heavy table scans");
  app.add_option("--convention", convention, "restriction side: r (range) or d (domain)")
      ->check(CLI::IsMember({"r", "d"}));
  app.add_option("--seed", seed, "sampling order for the lattice validator; never a verdict");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  auto t0 = std::chrono::steady_clock::now();
  nlohmann::ordered_json report;
  report["format"] = "qf-report 1";
  report["inputs"] = nlohmann::ordered_json::array();

  try {
    qf::Workspace w;
    for (const std::string& f : files) {
      std::string bytes = read_file(f);
      char hex[19];
      std::snprintf(hex, sizeof hex, "0x%016llx",
                    static_cast<unsigned long long>(fnv1a(bytes)));
      report["inputs"].push_back({{"path", f}, {"hash", hex}});
      qf::parse_into(w, bytes, f);
    }

    qf::SuiteOptions opt;
    opt.only = only;
    opt.max_size = max_size;
    opt.side = convention == "d" ? qf::Side::source : qf::Side::range;
    opt.seed = seed;
    report["convention"] = convention;
    report["seed"] = seed;
    report["max_size"] = max_size;
    report["only"] = only;

    if (!suite.empty()) {
      qf::SuiteReport r = qf::run_suite(w, suite, opt);
      report["mode"] = "run";
      report["suite"] = suite;
      if (!emit_path.empty()) std::ofstream(emit_path) << qf::emit_workspace(w);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      write_report(report, r.checks, ms, r.exit_code);
      print_summary("qforge: suite " + suite + " over " + std::to_string(files.size()) +
                        " file(s)",
                    r.checks, r.exit_code);
      return r.exit_code;
    }

    if (!what.empty()) {
      qf::ConstructResult cr = qf::construct(w, what, with, opt.side);
      report["mode"] = "construct";
      report["construct"] = what;
      report["name"] = cr.name;
      int code = check_exit(cr.checks);
      if (cr.name.empty() && code == 0) code = 1;  // nothing was built
      if (!emit_path.empty() && !cr.name.empty())
        std::ofstream(emit_path) << qf::emit_workspace(cr.objects);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
      write_report(report, cr.checks, ms, code);
      std::string head = cr.name.empty()
                             ? "qforge: construct " + what + " built nothing"
                             : "qforge: construct " + what + " built " + cr.name;
      print_summary(head, cr.checks, code);
      return code;
    }

    if (!emit_path.empty()) {
      // Plain load and re-emit; useful for normalizing files by hand.
      std::ofstream(emit_path) << qf::emit_workspace(w);
      std::cout << "qforge: emitted " << files.size() << " file(s) to " << emit_path << "\n";
      return 0;
    }

    std::cerr << "qforge: nothing to do; pass --suite, --construct, or --emit\n";
    return 3;
  } catch (const qf::UsageError& e) {
    std::cerr << "qforge: " << e.what() << "\n";
    return 3;
  } catch (const qf::StructuralError& e) {
    std::cerr << "qforge: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qforge: " << e.what() << "\n";
    return 3;
  }
}
