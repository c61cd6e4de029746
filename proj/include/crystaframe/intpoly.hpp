#pragma once

// Sparse multivariate polynomials with arbitrary-precision integer
// coefficients. Exponent vectors are packed into a 64-bit key with a fixed
// number of bits per variable.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "crystaframe/zpm.hpp"

namespace crystaframe {

using BigInt = boost::multiprecision::cpp_int;

struct PolyLayout {
  int nvars = 0;
  int bits = 8;
  std::uint64_t mask() const { return (std::uint64_t{1} << bits) - 1; }
  int exponent(std::uint64_t key, int var) const {
    return static_cast<int>((key >> (var * bits)) & mask());
  }
  std::uint64_t key_of_var(int var, int e) const { return static_cast<std::uint64_t>(e) << (var * bits); }
};

class IntPoly {
 public:
  IntPoly() = default;
  explicit IntPoly(PolyLayout layout) : layout_(layout) {}
  static IntPoly constant(PolyLayout layout, const BigInt& c);
  static IntPoly variable(PolyLayout layout, int var, int exponent = 1);

  const PolyLayout& layout() const { return layout_; }
  const std::unordered_map<std::uint64_t, BigInt>& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  IntPoly operator+(const IntPoly& o) const;
  IntPoly operator-(const IntPoly& o) const;
  IntPoly operator*(const IntPoly& o) const;
  IntPoly scaled(const BigInt& c) const;
  IntPoly pow(unsigned e) const;
  /// Exact division by an integer; throws if some coefficient is not divisible.
  IntPoly divided_exact(const BigInt& d) const;
  bool operator==(const IntPoly& o) const;

  /// Substitute polynomials for variables.
  IntPoly compose(const std::vector<IntPoly>& values, const PolyLayout& target) const;

  /// Monomial list sorted by key (deterministic iteration).
  std::vector<std::pair<std::uint64_t, BigInt>> sorted_terms() const;

 private:
  void add_term(std::uint64_t key, const BigInt& c);
  PolyLayout layout_;
  std::unordered_map<std::uint64_t, BigInt> terms_;
};

}  // namespace crystaframe
