#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crystaframe/scenario.hpp"
#include "json.hpp"

using namespace crystaframe;

namespace {

bool write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  return static_cast<bool>(out);
}

int run_verify_command(const std::string& tag, const std::vector<i64>& primes, int precision, const std::string& grid,
                       int threads, const std::string& report) {
  VerifyParams vp;
  VerifyResult r;
  try {
    vp.budgets = default_budgets();
    vp.primes = primes;
    vp.precision = precision;
    vp.threads = threads;
    if (!grid.empty()) vp.grid = parse_grid(grid);
    r = run_verify(tag, vp);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSemantic;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  }
  nlohmann::ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["tag"] = r.tag;
  j["checks"] = nlohmann::ordered_json::array();
  std::cout << "verify " << r.tag << "\n";
  for (const auto& c : r.checks) {
    std::cout << "  [" << (c.ok() ? "pass" : "fail") << "] " << c.name << ": " << c.passed << "/" << c.cases << "\n";
    for (const auto& x : c.counterexamples) std::cout << "      " << x << "\n";
    nlohmann::ordered_json row;
    row["name"] = c.name;
    row["cases"] = c.cases;
    row["passed"] = c.passed;
    row["counterexamples"] = c.counterexamples;
    j["checks"].push_back(row);
  }
  for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
  const int code = r.ok() ? kExitOk : kExitAssertion;
  j["notes"] = r.notes;
  j["exit_code"] = code;
  if (!report.empty() && !write_file(report, j.dump(2) + "\n")) {
    std::cerr << "error: cannot write " << report << "\n";
    return kExitSemantic;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crystaframe: frames, windows and connections over small p-adic rings"};
  app.require_subcommand(1);

  std::string file, report;
  int internal_precision = 0, threads = 1;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("file", file, "Scenario file")->required();
  run->add_option("--report", report, "Write the JSON report here");
  run->add_option("--internal-precision", internal_precision, "Working precision for lift and pd frames")
      ->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string tag, grid, vreport;
  std::vector<i64> primes;
  int precision = 0, vthreads = 1;
  auto* verify = app.add_subcommand("verify", "Run a property battery");
  verify->add_option("tag", tag, "One of: sigma1-formula, win-phi-mod, deform-win, integrability, pd-axioms, gamma-vp, "
                                 "f-nilpotent-sequence")
      ->required();
  verify->add_option("--p", primes, "Primes (repeat or comma separated)")->delimiter(',');
  verify->add_option("--precision", precision, "Precision m")->check(CLI::PositiveNumber);
  verify->add_option("--grid", grid, "Grid overrides, e.g. n=8,rank=2");
  verify->add_option("--threads", vthreads, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--report", vreport, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  if (*run) {
    RunResult r = run_scenario_file(file, RunOptions{internal_precision, threads});
    std::cout << r.text;
    if (!report.empty() && !write_file(report, r.json)) {
      std::cerr << "error: cannot write " << report << "\n";
      return kExitSemantic;
    }
    return r.exit_code;
  }
  return run_verify_command(tag, primes, precision, grid, vthreads, vreport);
}
