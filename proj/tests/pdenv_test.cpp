#include <random>

#include "crystaframe/pdenv.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

PDPtr line(i64 p, int m, int cap) {
  PDPresentation pr;
  pr.p = p;
  pr.m = m;
  pr.vars = {"x"};
  pr.generators = {{1}};
  pr.cap = cap;
  return PDAlgebra::build(pr);
}

i64 binom(int n, int k) {
  i64 r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

i64 fact(int n) { return n <= 1 ? 1 : n * fact(n - 1); }

}  // namespace

TEST_CASE("regular envelope of (p, x) is free on divided powers") {
  auto d = line(2, 3, 5);
  CHECK(d->regular());
  CHECK(d->width() == 5);
  auto rep = d->torsion_probe();
  CHECK(rep.witnesses.empty());
  CHECK(rep.free_rank_lower == 5);
}

TEST_CASE("divided powers multiply by binomial coefficients") {
  for (i64 p : {2, 3}) {
    auto d = line(p, 4, 7);
    for (int a = 0; a < 7; ++a)
      for (int b = 0; a + b < 7; ++b) {
        Elem lhs = d->mul(d->generator_power(0, a), d->generator_power(0, b));
        CHECK(lhs == d->scale(binom(a + b, a), d->generator_power(0, a + b)));
      }
    for (int n = 0; n < 7; ++n) CHECK(d->monomial({n}) == d->scale(fact(n), d->generator_power(0, n)));
  }
}

TEST_CASE("sigma is a ring map with sigma(x) = x^p") {
  std::mt19937_64 rng(3);
  auto d = line(3, 3, 7);
  CHECK(d->sigma(d->variable(0)) == d->monomial({3}));
  for (int t = 0; t < 30; ++t) {
    Elem a = d->element(static_cast<i64>(rng() % 5000)), b = d->element(static_cast<i64>(rng() % 5000));
    CHECK(d->sigma(d->mul(a, b)) == d->mul(d->sigma(a), d->sigma(b)));
    CHECK(d->sigma(d->add(a, b)) == d->add(d->sigma(a), d->sigma(b)));
  }
}

TEST_CASE("p sigma_1 = sigma on the ideal") {
  std::mt19937_64 rng(5);
  auto d = line(2, 3, 6);
  for (int t = 0; t < 60; ++t) {
    Elem a = d->element(static_cast<i64>(rng() % 100000));
    auto w = d->ideal_witness(a);
    if (!w) continue;
    CHECK(d->scale(2, d->sigma1(w->first, w->second)) == d->sigma(a));
  }
  // sigma_1(x) = (p-1)! x^[p]
  auto w = d->ideal_witness(d->variable(0));
  REQUIRE(w);
  CHECK(d->sigma1(w->first, w->second) == d->generator_power(0, 2));
}

TEST_CASE("derivative lowers divided degree") {
  auto d = line(2, 3, 5);
  const auto& low = d->lower();
  CHECK(low.cap() == 4);
  for (int n = 1; n < 5; ++n) CHECK(d->partial(d->generator_power(0, n), 0) == low.generator_power(0, n - 1));
  CHECK(is_zero(d->partial(d->one(), 0)));
  // (dsigma)_1(dx) = x^{p-1} dx
  auto c = d->dsigma1_dx(0);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == low.variable(0));
}

TEST_CASE("relations are respected by sigma and sigma_1") {
  PDPresentation pr;
  pr.p = 2;
  pr.m = 2;
  pr.vars = {"x", "y"};
  pr.generators = {{2, 0}, {1, 1}, {0, 2}};
  pr.cap = 3;
  auto d = PDAlgebra::build(pr);
  CHECK_FALSE(d->regular());
  CHECK_FALSE(d->well_definedness_defect().has_value());
}

TEST_CASE("torsion of the square of the maximal ideal") {
  PDPresentation pr;
  pr.p = 2;
  pr.m = 2;
  pr.vars = {"x", "y"};
  pr.generators = {{2, 0}, {1, 1}, {0, 2}};
  pr.cap = 5;
  auto d = PDAlgebra::build(pr);
  auto rep = d->torsion_probe();
  CHECK_FALSE(rep.witnesses.empty());
  for (const auto& t : rep.witnesses) {
    CHECK_FALSE(is_zero(t));
    CHECK(is_zero(d->scale(2, t)));
  }
  CHECK(rep.level.find("r=5") != std::string::npos);
}
