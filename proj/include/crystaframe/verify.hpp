#pragma once

// Property batteries behind `crystaframe verify <tag>`, and the budget
// defaults shared with scenarios.

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crystaframe/zpm.hpp"

namespace crystaframe {

struct Budgets {
  i64 max_carrier_size = i64{1} << 16;
  i64 max_enumeration = 50'000'000;
  int max_cap = 48;
};

/// Built-in defaults, overridden field-wise by CRYSTAFRAME_BUDGETS, e.g.
/// "max_carrier_size=4096,max_enumeration=1000000,max_cap=8".
/// Throws std::invalid_argument on a malformed variable.
Budgets default_budgets();
/// Same syntax as the environment variable, applied on top of `base`.
Budgets parse_budgets(const std::string& spec, Budgets base);

/// "n=8,r=4" -> {n: 8, r: 4}; throws std::invalid_argument.
std::map<std::string, i64> parse_grid(const std::string& spec);

struct VerifyParams {
  std::vector<i64> primes;  // empty: the tag's default grid
  int precision = 0;        // 0: the tag's default
  std::map<std::string, i64> grid;
  Budgets budgets;
  int threads = 1;
};

struct CheckCount {
  std::string name;
  i64 cases = 0;
  i64 passed = 0;
  std::vector<std::string> counterexamples;  // first few
  bool ok() const { return passed == cases; }
  void record(bool pass, const std::function<std::string()>& what);
};

struct VerifyResult {
  std::string tag;
  std::deque<CheckCount> checks;  // stable references
  std::vector<std::string> notes;  // findings; not failures
  bool ok() const;
  CheckCount& check(const std::string& name);
  const CheckCount* find(const std::string& name) const;
};

const std::vector<std::string>& verify_tags();
/// Throws std::invalid_argument on an unknown tag, BudgetExceeded when the
/// grid exceeds the budgets.
VerifyResult run_verify(const std::string& tag, const VerifyParams& params);

}  // namespace crystaframe
