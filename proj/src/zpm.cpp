#include "crystaframe/zpm.hpp"

#include <sstream>

namespace crystaframe {

bool is_prime(i64 n) {
  if (n < 2) return false;
  for (i64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

i64 ipow(i64 base, int exp) {
  i64 r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

int vp_int(i64 n, i64 p) {
  if (n == 0) throw AlgebraError("vp_int: zero has infinite valuation");
  if (n < 0) n = -n;
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

int vp_factorial(i64 n, i64 p) {
  int v = 0;
  for (i64 q = p; q <= n; q *= p) v += static_cast<int>(n / q);
  return v;
}

CoefficientRing::CoefficientRing(i64 p, int m, int factorial_bound) : p_(p), m_(m) {
  if (!is_prime(p)) throw AlgebraError("CoefficientRing: p = " + std::to_string(p) + " is not prime");
  if (m < 1) throw AlgebraError("CoefficientRing: precision must be >= 1");
  q_ = 1;
  for (int i = 0; i < m; ++i) {
    if (q_ > (i64{1} << 40) / p) throw AlgebraError("CoefficientRing: p^m too large");
    q_ *= p;
  }
  fact_units_.assign(1, 1);
  for (i64 k = 1; k <= factorial_bound; ++k) {
    i64 u = k;
    while (u % p_ == 0) u /= p_;
    fact_units_.push_back(mul(fact_units_.back(), reduce(u)));
  }
}

i64 CoefficientRing::pow(i64 a, i64 e) const {
  i64 r = reduce(1), b = reduce(a);
  while (e > 0) {
    if (e & 1) r = mul(r, b);
    b = mul(b, b);
    e >>= 1;
  }
  return r;
}

i64 CoefficientRing::inverse(i64 a) const {
  a = reduce(a);
  if (a % p_ == 0) throw AlgebraError("inverse of a non-unit modulo p^m");
  // extended Euclid
  i64 t = 0, nt = 1, r = q_, nr = a;
  while (nr != 0) {
    i64 qt = r / nr;
    i64 tmp = t - qt * nt;
    t = nt;
    nt = tmp;
    tmp = r - qt * nr;
    r = nr;
    nr = tmp;
  }
  return reduce(t);
}

int CoefficientRing::valuation(i64 a) const {
  a = reduce(a);
  if (a == 0) return m_;
  return vp_int(a, p_);
}

i64 CoefficientRing::factorial_unit(i64 n) const {
  if (n < static_cast<i64>(fact_units_.size())) return fact_units_[static_cast<size_t>(n)];
  i64 r = fact_units_.back();
  for (i64 k = static_cast<i64>(fact_units_.size()); k <= n; ++k) {
    i64 u = k;
    while (u % p_ == 0) u /= p_;
    r = mul(r, reduce(u));
  }
  return r;
}

ValuationUnit valuation_and_unit(i64 z, const CoefficientRing& ring) {
  z = ring.reduce(z);
  if (z == 0) return {std::nullopt, 1};
  int v = 0;
  while (z % ring.p() == 0) {
    z /= ring.p();
    ++v;
  }
  // z is the unit part modulo p^{m-v}
  i64 mod = ipow(ring.p(), ring.m() - v);
  return {v, z % mod};
}

int divided_power_constant_valuation(i64 n, i64 p) {
  return vp_factorial(n * p, p) - vp_factorial(n, p) - 1;
}

i64 p_power_over_factorial(int a, i64 b, const CoefficientRing& ring) {
  int v = a - vp_factorial(b, ring.p());
  if (v < 0) throw AlgebraError("p^a/b! is not p-integral");
  if (v >= ring.m()) return 0;
  return ring.mul(ipow(ring.p(), v), ring.inverse(ring.factorial_unit(b)));
}

i64 divided_power_constant(i64 n, const CoefficientRing& ring) {
  if (n < 1) throw AlgebraError("divided_power_constant: n must be >= 1");
  const i64 p = ring.p();
  int v = divided_power_constant_valuation(n, p);
  if (v < 0) throw AlgebraError("divided_power_constant: (np)!/(n! p) not integral");
  if (v >= ring.m()) return 0;
  i64 unit = ring.mul(ring.factorial_unit(n * p), ring.inverse(ring.factorial_unit(n)));
  return ring.mul(ipow(p, v), unit);
}

i64 gamma_of_p(i64 n, const CoefficientRing& ring) {
  if (n < 1) throw AlgebraError("gamma_of_p: n must be >= 1");
  return p_power_over_factorial(static_cast<int>(n), n, ring);
}

void PrecisionLedger::check(Tracked a) const {
  if (a.digits <= 0) throw AlgebraError("precision exhausted: operand has no certified digits");
  if (a.digits < min_seen_) min_seen_ = a.digits;
}

Tracked PrecisionLedger::add(Tracked a, Tracked b) const {
  check(a);
  check(b);
  return {ring_.add(a.value, b.value), std::min(a.digits, b.digits)};
}

Tracked PrecisionLedger::mul(Tracked a, Tracked b) const {
  check(a);
  check(b);
  return {ring_.mul(a.value, b.value), std::min(a.digits, b.digits)};
}

Tracked PrecisionLedger::divide_by_p(Tracked a) const {
  check(a);
  if (a.value % ring_.p() != 0) throw AlgebraError("divide_by_p: value not divisible by p");
  Tracked r{a.value / ring_.p(), a.digits - 1};
  if (r.digits < min_seen_) min_seen_ = r.digits;
  return r;
}

bool PrecisionLedger::equal_mod(i64 a, i64 b, int digits) const {
  if (digits <= 0) return true;
  i64 mod = ipow(ring_.p(), std::min(digits, ring_.m()));
  return ((a - b) % mod + mod) % mod == 0;
}

bool PrecisionLedger::equal(Tracked a, Tracked b) const {
  check(a);
  check(b);
  return equal_mod(a.value, b.value, std::min(a.digits, b.digits));
}

std::string PrecisionLedger::trace() const {
  std::ostringstream os;
  os << "target=" << ring_.m() << " min_certified=" << (min_seen_ > ring_.m() ? ring_.m() : min_seen_);
  return os.str();
}

}  // namespace crystaframe
