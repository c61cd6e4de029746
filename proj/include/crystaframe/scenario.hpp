#pragma once

// Scenario files and reports.
//
//   format_version = 1
//   p = 2
//   precision = 2
//   [budgets]
//   max_carrier_size = 4096      (or "default")
//   max_enumeration = 1000000
//   max_cap = 8
//   [algebra R]  field, vars, depth
//   [frame F]    kind = witt | witt-lift | lift | pd | quotient
//   [hom H]      kind = identity | augmentation | quotient-projection
//   [window W]   frame, d, t, psi
//   [commands]   one command per line
//
// Lines are `key = value`; `#` starts a comment. See README.md for the
// command reference and the report schema.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "crystaframe/verify.hpp"

namespace crystaframe {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

enum ExitCode { kExitOk = 0, kExitAssertion = 1, kExitParse = 2, kExitSemantic = 3, kExitBudget = 4 };

class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { Parse, Semantic };
  ScenarioError(Kind kind, int line, int column, const std::string& msg);
  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_, column_;
};

struct Entry {
  std::string key, value;
  int line = 0;
  int column = 0;  // of the value
};

struct Section {
  std::string kind;  // budgets, algebra, frame, hom, window, commands
  std::string name;
  int line = 0;
  std::vector<Entry> entries;  // commands: key is the verb, value the argument text
  const Entry* find(const std::string& key) const;
};

struct Scenario {
  std::string source;  // file name as given
  int format_version = 0;
  i64 p = 0;
  int precision = 0;
  int depth = 0;  // max perfection depth of algebra variables
  std::map<std::string, int> field_lines;
  Budgets budgets;
  std::vector<Section> sections;
};

/// Syntax only; throws ScenarioError(Parse).
Scenario parse_scenario(const std::string& text, const std::string& source, const Budgets& defaults);
Scenario load_scenario(const std::string& path, const Budgets& defaults);

struct RunOptions {
  int internal_precision = 0;  // 0: the scenario precision
  int threads = 1;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string text;  // human-readable summary
  std::string json;  // machine-readable report
};

/// Builds every declaration, then runs the commands in order. Semantic
/// errors surface as ScenarioError(Semantic); budget overruns as
/// BudgetExceeded. Command failures set exit code 1.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts);

/// run_scenario with all errors mapped to exit codes and messages.
RunResult run_scenario_file(const std::string& path, const RunOptions& opts);

}  // namespace crystaframe
