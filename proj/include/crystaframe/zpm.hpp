#pragma once

// Residues modulo p^m, p-adic valuations and the divided-power constants
// c_n = (np)!/(n! p) and gamma_n(p) = p^n/n!.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crystaframe {

using i64 = std::int64_t;
using i128 = __int128;

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exhaustive operation would exceed a configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool is_prime(i64 n);
i64 ipow(i64 base, int exp);

/// p-adic valuation of a nonzero integer.
int vp_int(i64 n, i64 p);
/// Legendre: v_p(n!).
int vp_factorial(i64 n, i64 p);

/// Z/p^m with canonical representatives in [0, p^m).
class CoefficientRing {
 public:
  static constexpr int kDefaultFactorialBound = 64;

  CoefficientRing(i64 p, int m, int factorial_bound = kDefaultFactorialBound);

  i64 p() const { return p_; }
  int m() const { return m_; }
  i64 modulus() const { return q_; }

  i64 reduce(i64 x) const {
    i64 r = x % q_;
    return r < 0 ? r + q_ : r;
  }
  i64 reduce128(i128 x) const {
    i128 r = x % q_;
    if (r < 0) r += q_;
    return static_cast<i64>(r);
  }
  i64 add(i64 a, i64 b) const { return reduce(a + b); }
  i64 sub(i64 a, i64 b) const { return reduce(a - b); }
  i64 neg(i64 a) const { return reduce(-a); }
  i64 mul(i64 a, i64 b) const { return reduce128(static_cast<i128>(a) * b); }
  i64 pow(i64 a, i64 e) const;
  bool is_unit(i64 a) const { return reduce(a) % p_ != 0; }
  /// Inverse of a unit; throws AlgebraError otherwise.
  i64 inverse(i64 a) const;
  /// v_p of a residue, m for zero.
  int valuation(i64 a) const;

  /// Unit part of n! modulo p^m, i.e. n!/p^{v_p(n!)}.
  i64 factorial_unit(i64 n) const;

  bool operator==(const CoefficientRing& o) const { return p_ == o.p_ && m_ == o.m_; }

 private:
  i64 p_;
  int m_;
  i64 q_;
  std::vector<i64> fact_units_;
};

/// z = p^v u. Zero maps to (+inf, 1), encoded as nullopt.
struct ValuationUnit {
  std::optional<int> valuation;
  i64 unit;
};
ValuationUnit valuation_and_unit(i64 z, const CoefficientRing& ring);

/// c_n = (np)!/(n! p) mod p^m.
i64 divided_power_constant(i64 n, const CoefficientRing& ring);
/// v_p(c_n), exact.
int divided_power_constant_valuation(i64 n, i64 p);

/// gamma_n(p) = p^n / n! mod p^m.
i64 gamma_of_p(i64 n, const CoefficientRing& ring);

/// p^a / b! as a p-integral residue (requires a >= v_p(b!)).
i64 p_power_over_factorial(int a, i64 b, const CoefficientRing& ring);

/// Residue together with the number of p-adic digits that are certified.
struct Tracked {
  i64 value = 0;
  int digits = 0;
};

/// Precision bookkeeping: results carry the minimum operand precision and
/// every division by p consumes one digit.
class PrecisionLedger {
 public:
  explicit PrecisionLedger(const CoefficientRing& ring) : ring_(ring) {}

  int target() const { return ring_.m(); }
  Tracked make(i64 v) const { return {ring_.reduce(v), ring_.m()}; }
  Tracked add(Tracked a, Tracked b) const;
  Tracked mul(Tracked a, Tracked b) const;
  /// Requires p | a at a's precision; result has one fewer digit.
  Tracked divide_by_p(Tracked a) const;
  /// Equality at min(a.digits, b.digits, digits).
  bool equal(Tracked a, Tracked b) const;
  bool equal_mod(i64 a, i64 b, int digits) const;

  std::string trace() const;
  int min_digits_seen() const { return min_seen_; }

 private:
  void check(Tracked a) const;
  const CoefficientRing& ring_;
  mutable int min_seen_ = 1 << 20;
};

}  // namespace crystaframe
