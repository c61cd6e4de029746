#include "crystaframe/scenario.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace crystaframe;

namespace {

const std::string kSource = CRYSTAFRAME_SOURCE_DIR;

const char* kHeader =
    "format_version = 1\n"
    "p = 2\n"
    "precision = 2\n"
    "\n"
    "[budgets]\n"
    "max_carrier_size = 4096\n"
    "max_enumeration = default\n"
    "max_cap = 8\n";

ScenarioError parse_error_of(const std::string& text) {
  try {
    parse_scenario(text, "t.scn", Budgets{});
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("no error");
  return ScenarioError(ScenarioError::Kind::Parse, 0, 0, "");
}

RunResult run_text(const std::string& text, RunOptions opts = {}) {
  return run_scenario(parse_scenario(text, "t.scn", Budgets{}), opts);
}

ScenarioError semantic_error_of(const Scenario& sc, RunOptions opts = {}) {
  try {
    run_scenario(sc, opts);
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("no error");
  return ScenarioError(ScenarioError::Kind::Parse, 0, 0, "");
}

}  // namespace

TEST_CASE("a well-formed scenario parses") {
  auto sc = parse_scenario(std::string(kHeader) + "\n[frame Z4]\nkind = lift\n\n[commands]\nvalidate frame=Z4\n", "t.scn",
                           Budgets{});
  CHECK(sc.format_version == 1);
  CHECK(sc.p == 2);
  CHECK(sc.precision == 2);
  CHECK(sc.budgets.max_carrier_size == 4096);
  CHECK(sc.budgets.max_enumeration == Budgets{}.max_enumeration);
  CHECK(sc.budgets.max_cap == 8);
}

TEST_CASE("parse errors carry a location") {
  auto e = parse_error_of(std::string(kHeader) + "[commands]\nvalidate frame=X\n[frobnicate]\n");
  CHECK(e.kind() == ScenarioError::Kind::Parse);
  CHECK(e.line() == 11);
  CHECK(e.column() == 2);

  auto v = parse_error_of("format_version = 7\np = 2\nprecision = 2\n");
  CHECK(v.line() == 1);

  // budgets are mandatory
  auto b = parse_error_of("format_version = 1\np = 2\nprecision = 2\n[commands]\n");
  CHECK(b.kind() == ScenarioError::Kind::Parse);

  auto k = parse_error_of(std::string(kHeader) + "[frame Z4]\nkind\n[commands]\n");
  CHECK(k.line() == 10);
}

TEST_CASE("unknown names are semantic errors") {
  auto e = semantic_error_of(parse_scenario(std::string(kHeader) + "[commands]\nvalidate frame=Nope\n", "t.scn", Budgets{}));
  CHECK(e.kind() == ScenarioError::Kind::Semantic);
  CHECK(e.line() == 10);
  auto v = semantic_error_of(parse_scenario(std::string(kHeader) + "[commands]\nfrobnicate x=1\n", "t.scn", Budgets{}));
  CHECK(v.kind() == ScenarioError::Kind::Semantic);
}

TEST_CASE("budgets stop enumeration") {
  auto r = run_text(
      "format_version = 1\np = 3\nprecision = 3\n[budgets]\nmax_carrier_size = 16\nmax_enumeration = default\n"
      "max_cap = default\n[frame Z27]\nkind = lift\n[commands]\nclassify frame=Z27 rank=1\n");
  CHECK(r.exit_code == kExitBudget);
  CHECK(nlohmann::json::parse(r.json)["error"]["kind"] == "budget");
}

TEST_CASE("budget strings") {
  Budgets b = parse_budgets("max_cap=5,max_carrier_size=64", Budgets{});
  CHECK(b.max_cap == 5);
  CHECK(b.max_carrier_size == 64);
  CHECK(b.max_enumeration == Budgets{}.max_enumeration);
  CHECK_THROWS_AS(parse_budgets("max_cap", Budgets{}), std::invalid_argument);
  CHECK_THROWS_AS(parse_budgets("unknown=3", Budgets{}), std::invalid_argument);
}

TEST_CASE("internal precision below the declared one is rejected") {
  auto sc = parse_scenario(std::string(kHeader) + "[frame Z4]\nkind = lift\n[commands]\nvalidate frame=Z4\n", "t.scn",
                           Budgets{});
  CHECK(semantic_error_of(sc, RunOptions{1, 1}).kind() == ScenarioError::Kind::Semantic);
  CHECK(run_scenario(sc, RunOptions{3, 1}).exit_code == kExitOk);
}

TEST_CASE("data files map to their exit codes") {
  const std::pair<const char*, int> cases[] = {
      {"malformed.scn", kExitParse},       {"missing_budgets.scn", kExitParse}, {"unknown_frame.scn", kExitSemantic},
      {"over_budget.scn", kExitBudget},    {"wrong_count.scn", kExitAssertion}, {"torsion_finding.scn", kExitOk},
  };
  for (auto [name, code] : cases) {
    CAPTURE(name);
    CHECK(run_scenario_file(kSource + "/tests/data/" + name, RunOptions{}).exit_code == code);
  }
  CHECK(run_scenario_file(kSource + "/tests/data/absent.scn", RunOptions{}).exit_code == kExitParse);
}

TEST_CASE("bundled scenarios pass and reports are deterministic") {
  for (const char* name : {"witt_frame_f2.scn", "classify_rank1_zp2.scn", "tour.scn"}) {
    CAPTURE(name);
    const std::string path = kSource + "/scenarios/" + name;
    auto a = run_scenario_file(path, RunOptions{0, 1});
    auto b = run_scenario_file(path, RunOptions{0, 3});
    CHECK(a.exit_code == kExitOk);
    CHECK(a.json == b.json);
    auto j = nlohmann::json::parse(a.json);
    CHECK(j["format_version"] == kReportFormatVersion);
    CHECK(j["summary"]["fail"] == 0);
  }
}

TEST_CASE("classification report lists four classes") {
  auto r = run_scenario_file(kSource + "/scenarios/classify_rank1_zp2.scn", RunOptions{});
  auto j = nlohmann::json::parse(r.json);
  bool seen = false;
  for (const auto& c : j["commands"])
    if (c["command"] == "classify") {
      seen = true;
      CHECK(c["details"]["classes"].size() == 4);
    }
  CHECK(seen);
}
