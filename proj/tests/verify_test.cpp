#include "crystaframe/verify.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

VerifyResult small(const std::string& tag, const std::map<std::string, i64>& grid, std::vector<i64> primes = {}) {
  VerifyParams vp;
  vp.budgets = Budgets{};
  vp.primes = std::move(primes);
  vp.grid = grid;
  vp.threads = 2;
  return run_verify(tag, vp);
}

void require_clean(const VerifyResult& r) {
  CAPTURE(r.tag);
  CHECK_FALSE(r.checks.empty());
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CHECK(c.cases > 0);
    CHECK(c.ok());
  }
}

}  // namespace

TEST_CASE("grid strings") {
  auto g = parse_grid("n=8,rank=2");
  CHECK(g.at("n") == 8);
  CHECK(g.at("rank") == 2);
  CHECK(parse_grid("").empty());
  CHECK_THROWS_AS(parse_grid("n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("n=x"), std::invalid_argument);
}

TEST_CASE("unknown tags and bad parameters are rejected") {
  CHECK_THROWS_AS(small("no-such-tag", {}), std::invalid_argument);
  VerifyParams vp;
  vp.threads = 0;
  CHECK_THROWS_AS(run_verify("sigma1-formula", vp), std::invalid_argument);
  CHECK(verify_tags().size() == 7);
}

TEST_CASE("oversized grids hit the budget") {
  CHECK_THROWS_AS(small("sigma1-formula", {{"n", 40}}), BudgetExceeded);
}

TEST_CASE("sigma1-formula") { require_clean(small("sigma1-formula", {{"n", 4}}, {2, 3, 5})); }

TEST_CASE("pd-axioms") { require_clean(small("pd-axioms", {{"r", 4}, {"m", 3}, {"square_r", 5}})); }

TEST_CASE("f-nilpotent-sequence") { require_clean(small("f-nilpotent-sequence", {{"depth", 1}})); }

TEST_CASE("gamma-vp") { require_clean(small("gamma-vp", {{"n", 2}, {"samples", 3}})); }

TEST_CASE("win-phi-mod at rank 1") { require_clean(small("win-phi-mod", {{"rank", 1}})); }

TEST_CASE("deform-win at rank 1") { require_clean(small("deform-win", {{"rank", 1}})); }

TEST_CASE("integrability on a few windows") {
  require_clean(small("integrability", {{"windows", 10}, {"min_solutions", 5}}));
}

TEST_CASE("thread count does not change the outcome") {
  VerifyParams a;
  a.grid = {{"rank", 1}};
  a.threads = 1;
  VerifyParams b = a;
  b.threads = 3;
  auto ra = run_verify("win-phi-mod", a), rb = run_verify("win-phi-mod", b);
  REQUIRE(ra.checks.size() == rb.checks.size());
  for (size_t i = 0; i < ra.checks.size(); ++i) {
    CHECK(ra.checks[i].cases == rb.checks[i].cases);
    CHECK(ra.checks[i].passed == rb.checks[i].passed);
  }
}
