#include <random>
#include <set>

#include "crystaframe/intpoly.hpp"
#include "crystaframe/monomial_algebra.hpp"
#include "crystaframe/ring.hpp"
#include "doctest.h"

using namespace crystaframe;

namespace {

BigInt factorial(i64 n) {
  BigInt f = 1;
  for (i64 i = 2; i <= n; ++i) f *= i;
  return f;
}

i64 mod(const BigInt& x, i64 q) {
  BigInt r = x % q;
  if (r < 0) r += q;
  return static_cast<i64>(r);
}

int vp_big(BigInt x, i64 p) {
  int v = 0;
  while (x != 0 && x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

}  // namespace

TEST_CASE("valuation and unit") {
  CoefficientRing z16(2, 4);
  auto vu = valuation_and_unit(12, z16);
  REQUIRE(vu.valuation.has_value());
  CHECK(*vu.valuation == 2);
  CHECK(vu.unit == 3);
  CHECK_FALSE(valuation_and_unit(0, z16).valuation.has_value());
  CHECK(*valuation_and_unit(1, z16).valuation == 0);
}

TEST_CASE("integer helpers") {
  CHECK(ipow(3, 4) == 81);
  CHECK(is_prime(2));
  CHECK(is_prime(97));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(91));
  CHECK(vp_int(48, 2) == 4);
  for (i64 p : {2, 3, 5})
    for (i64 n = 0; n <= 30; ++n) CHECK(vp_factorial(n, p) == vp_big(factorial(n), p));
}

TEST_CASE("units of Z/p^m invert") {
  for (auto [p, m] : {std::pair<i64, int>{2, 5}, {3, 3}, {5, 2}}) {
    CoefficientRing r(p, m);
    for (i64 a = 0; a < r.modulus(); ++a) {
      CHECK(r.is_unit(a) == (a % p != 0));
      if (r.is_unit(a)) CHECK(r.mul(a, r.inverse(a)) == 1);
    }
    CHECK_THROWS_AS(r.inverse(p), AlgebraError);
  }
}

TEST_CASE("c_n for small n") {
  CoefficientRing r(2, 8);
  CHECK(divided_power_constant(1, r) == 1);
  CHECK(divided_power_constant(2, r) == 6);
  CHECK(divided_power_constant(3, r) == 60);
}

TEST_CASE("c_n against exact factorials") {
  for (i64 p : {2, 3, 5}) {
    CoefficientRing r(p, 6);
    for (i64 n = 1; n <= 10; ++n) {
      const BigInt exact = factorial(n * p) / (factorial(n) * p);
      CHECK(divided_power_constant(n, r) == mod(exact, r.modulus()));
      CHECK(divided_power_constant_valuation(n, p) == vp_big(exact, p));
    }
  }
}

TEST_CASE("p^a / b! residues") {
  CoefficientRing z27(3, 3);
  const i64 x = p_power_over_factorial(2, 3, z27);  // 9/6 = 3/2
  CHECK(z27.mul(x, 2) == 3);
  CHECK(x == 15);
  CoefficientRing z64(2, 6);
  for (i64 n = 1; n <= 12; ++n) {
    const i64 g = gamma_of_p(n, z64);
    // n! gamma_n(p) = p^n
    CHECK(mod(factorial(n) * g, 64) == mod(BigInt(ipow(2, static_cast<int>(n))), 64));
  }
}

TEST_CASE("precision ledger consumes one digit per division") {
  CoefficientRing r(2, 5);
  PrecisionLedger led(r);
  Tracked a = led.make(12);
  Tracked b = led.divide_by_p(a);
  CHECK(b.value % 8 == 6);
  CHECK(b.digits == 4);
  Tracked c = led.divide_by_p(b);
  CHECK(c.digits == 3);
  CHECK(led.min_digits_seen() == 3);
  CHECK(led.mul(c, led.make(1)).digits == 3);
}

TEST_CASE("Howell form of a small span") {
  CoefficientRing z8(2, 3);
  HowellForm h(z8, 2, {{2, 4}, {0, 4}});
  CHECK(h.log_p_size() == 3);
  CHECK(h.contains({2, 0}));
  CHECK_FALSE(h.contains({1, 0}));
  CHECK(h.reduce({3, 5}) == h.reduce({5, 1}));
}

TEST_CASE("Howell span size matches enumeration") {
  std::mt19937_64 rng(5);
  CoefficientRing z4(2, 2);
  for (int trial = 0; trial < 40; ++trial) {
    Mat rows(3, Vec(3));
    for (auto& row : rows)
      for (auto& x : row) x = static_cast<i64>(rng() % 4);
    std::set<Vec> span;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          Vec v(3);
          for (size_t j = 0; j < 3; ++j) v[j] = z4.reduce(a * rows[0][j] + b * rows[1][j] + c * rows[2][j]);
          span.insert(v);
        }
    HowellForm h(z4, 3, rows);
    CHECK(static_cast<size_t>(ipow(2, h.log_p_size())) == span.size());
    for (const auto& v : span) CHECK(h.contains(v));
  }
}

TEST_CASE("solve_left returns a solution when one exists") {
  std::mt19937_64 rng(9);
  CoefficientRing z9(3, 2);
  for (int trial = 0; trial < 40; ++trial) {
    Mat a(3, Vec(4));
    for (auto& row : a)
      for (auto& x : row) x = static_cast<i64>(rng() % 9);
    Vec x0(3), b(4, 0);
    for (auto& x : x0) x = static_cast<i64>(rng() % 9);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 4; ++j) b[j] = z9.add(b[j], z9.mul(x0[i], a[i][j]));
    auto sol = solve_left(z9, a, 4, b);
    REQUIRE(sol.solvable);
    Vec got(4, 0);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 4; ++j) got[j] = z9.add(got[j], z9.mul(sol.particular[i], a[i][j]));
    CHECK(got == b);
    for (const auto& k : sol.homogeneous) {
      Vec zero(4, 0);
      for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 4; ++j) zero[j] = z9.add(zero[j], z9.mul(k[i], a[i][j]));
      CHECK(is_zero(zero));
    }
  }
}

TEST_CASE("truncated polynomial algebra over F_2") {
  auto a = MonomialAlgebra::create(CoeffField::residue(2, 1), {VariableSpec{"x", 0, 3}});
  CHECK(a->rank() == 3);
  Vec x = a->variable(0);
  CHECK(a->is_zero(a->mul(x, a->mul(x, x))));
  CHECK(a->frobenius(x) == a->mul(x, x));
  CHECK_FALSE(a->is_perfect());
  auto nil = frobenius_kernel_nilpotency(*a);
  CHECK(nil.nilpotent);
  CHECK(nil.index == 2);
  CHECK(a->is_unit(a->add(a->one(), x)));
  CHECK(a->mul(a->add(a->one(), x), a->inverse(a->add(a->one(), x))) == a->one());
}

TEST_CASE("F_4 has multiplicative group of order 3") {
  auto f4 = CoeffField::extension(2, {1, 1, 1});
  CHECK(f4.size() == 4);
  for (i64 a = 1; a < 4; ++a) CHECK(f4.pow(a, 3) == f4.one());
  for (i64 a = 0; a < 4; ++a) CHECK(f4.frobenius(f4.frobenius(a)) == a);
}

TEST_CASE("adjoining p-th roots multiplies the rank") {
  auto a = MonomialAlgebra::create(CoeffField::residue(2, 1), {VariableSpec{"x", 0, 3}});
  auto b = adjoin_p_roots(a, {"x"}, 1);
  CHECK(b->rank() == 2 * a->rank());
  Vec r = b->variable(0, 1);  // x^(1/2)
  CHECK(b->mul(r, r) == embed_into(*a, *b, a->variable(0)));
}

TEST_CASE("integer polynomials expand") {
  PolyLayout l{2, 8};
  IntPoly x = IntPoly::variable(l, 0), y = IntPoly::variable(l, 1);
  IntPoly lhs = (x + y).pow(2);
  IntPoly rhs = x * x + (x * y).scaled(2) + y * y;
  CHECK(lhs == rhs);
  CHECK((lhs - rhs).is_zero());
  CHECK(((x * y).scaled(6)).divided_exact(3) == (x * y).scaled(2));
  CHECK_THROWS((x.scaled(3)).divided_exact(2));
}
