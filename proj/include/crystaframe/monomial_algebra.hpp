#pragma once

// Finite-rank monomial-quotient algebras over F_p, F_{p^k} or Z/p^m, with
// fractional exponents of bounded p-power denominator.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crystaframe/howell.hpp"
#include "crystaframe/zpm.hpp"

namespace crystaframe {

/// Coefficients: Z/p^m, or F_{p^k} given by a monic irreducible modulus
/// (low-to-high coefficients, length k+1). F_{p^k} elements are encoded as
/// base-p digit strings packed into one integer.
class CoeffField {
 public:
  static CoeffField residue(i64 p, int m);
  static CoeffField extension(i64 p, std::vector<i64> modulus);

  i64 p() const { return p_; }
  int m() const { return m_; }
  int degree() const { return k_; }
  i64 size() const { return size_; }
  bool char_p() const { return m_ == 1; }
  const std::vector<i64>& modulus_poly() const { return modulus_; }

  i64 zero() const { return 0; }
  i64 one() const { return 1; }
  i64 from_int(i64 n) const;
  i64 add(i64 a, i64 b) const;
  i64 neg(i64 a) const;
  i64 sub(i64 a, i64 b) const { return add(a, neg(b)); }
  i64 mul(i64 a, i64 b) const;
  i64 pow(i64 a, i64 e) const;
  bool is_unit(i64 a) const;
  i64 inverse(i64 a) const;
  /// a^p; only in characteristic p.
  i64 frobenius(i64 a) const;
  /// Coordinates over the prime ring (length k).
  std::vector<i64> digits(i64 a) const;
  i64 from_digits(const std::vector<i64>& d) const;
  const CoefficientRing& prime_ring() const { return *prime_; }

  bool operator==(const CoeffField& o) const {
    return p_ == o.p_ && m_ == o.m_ && modulus_ == o.modulus_;
  }

 private:
  i64 p_ = 2;
  int m_ = 1;
  int k_ = 1;
  i64 size_ = 2;
  std::vector<i64> modulus_;
  std::shared_ptr<CoefficientRing> prime_;
  std::vector<i64> mul_table_;  // only for k > 1
};

using Monomial = std::vector<int>;  // exponent numerators, per-variable denominators

struct VariableSpec {
  std::string name;
  int depth = 0;          // exponents lie in p^{-depth} Z
  std::optional<int> cap; // numerator; x^e = 0 for e >= cap. nullopt = no bound
};

class MonomialAlgebra;
using AlgebraPtr = std::shared_ptr<const MonomialAlgebra>;

class MonomialAlgebra : public std::enable_shared_from_this<MonomialAlgebra> {
 public:
  static constexpr int kMaxDepth = 10;
  static constexpr size_t kMaxRank = 4096;

  /// total_cap: optional bound on the total degree (as numerator over
  /// p^{total_cap_depth}).
  static AlgebraPtr create(CoeffField field, std::vector<VariableSpec> vars,
                           std::optional<std::pair<int, int>> total_cap = std::nullopt);

  const CoeffField& field() const { return field_; }
  const std::vector<VariableSpec>& variables() const { return vars_; }
  std::optional<std::pair<int, int>> total_cap() const { return total_cap_; }
  size_t rank() const { return basis_.size(); }
  const std::vector<Monomial>& basis() const { return basis_; }
  std::optional<size_t> index_of(const Monomial& mono) const;
  bool admissible(const Monomial& mono) const;
  size_t variable_index(const std::string& name) const;

  Vec zero() const { return Vec(rank(), 0); }
  Vec one() const;
  Vec constant(i64 c) const;
  Vec monomial(const Monomial& mono, i64 c = 1) const;
  /// x_i^{num/p^depth_i}
  Vec variable(size_t i, int num = -1) const;

  Vec add(const Vec& a, const Vec& b) const;
  Vec sub(const Vec& a, const Vec& b) const;
  Vec neg(const Vec& a) const;
  Vec scale(i64 c, const Vec& a) const;
  Vec mul(const Vec& a, const Vec& b) const;
  Vec pow(const Vec& a, i64 e) const;
  bool is_zero(const Vec& a) const { return crystaframe::is_zero(a); }
  /// Units are exactly the elements with unit constant term when every
  /// variable is nilpotent; otherwise a brute-force check is used.
  bool is_unit(const Vec& a) const;
  Vec inverse(const Vec& a) const;
  bool all_variables_nilpotent() const;

  /// Frobenius a -> a^p (characteristic p only).
  Vec frobenius(const Vec& a) const;
  bool is_perfect() const;

  /// Monomial ideal generated by the given monomials: membership of basis
  /// elements, and reduction modulo the ideal (zeroing coefficients).
  std::vector<bool> ideal_mask(const std::vector<Monomial>& gens) const;
  Vec reduce_mod_ideal(const Vec& a, const std::vector<bool>& mask) const;

  /// Total number of elements (|field|^rank), if it fits.
  std::optional<i64> cardinality() const;
  Vec element_from_index(i64 idx) const;

  std::string to_string(const Vec& a) const;
  std::string describe() const;

 private:
  MonomialAlgebra() = default;
  void build();

  CoeffField field_ = CoeffField::residue(2, 1);
  std::vector<VariableSpec> vars_;
  std::optional<std::pair<int, int>> total_cap_;
  std::vector<Monomial> basis_;
  std::map<Monomial, size_t> index_;
  std::vector<int> mul_table_;  // rank*rank, -1 means product lies in the ideal
  std::vector<int> frob_table_; // image of each basis monomial under exponent*p
};

/// ker(phi) by linear algebra over F_p, then ideal powers until zero.
struct NilpotencyReport {
  bool nilpotent = false;
  int index = 0;        // smallest r >= 1 with (ker phi)^r = 0
  int kernel_dim = 0;   // F_p-dimension of ker phi
};
NilpotencyReport frobenius_kernel_nilpotency(const MonomialAlgebra& r);

/// F_p-basis of ker(phi), as algebra elements.
std::vector<Vec> frobenius_kernel_basis(const MonomialAlgebra& r);

/// Raise the perfection depth of the target variables to `depth`.
AlgebraPtr adjoin_p_roots(const AlgebraPtr& r, const std::vector<std::string>& targets, int depth);
/// Inclusion R -> R[a^{1/p^N}] on elements.
Vec embed_into(const MonomialAlgebra& from, const MonomialAlgebra& to, const Vec& a);

}  // namespace crystaframe
