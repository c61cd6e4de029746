#pragma once

// Truncated p-typical Witt vectors over monomial algebras.

#include <memory>
#include <vector>

#include "crystaframe/intpoly.hpp"
#include "crystaframe/ring.hpp"

namespace crystaframe {

/// Universal sum and product polynomials S_i, P_i in x_0..x_{n-1},
/// y_0..y_{n-1}. Built once per (p, n) by exact integer recursion.
class WittPolynomialCache {
 public:
  static std::shared_ptr<const WittPolynomialCache> get(i64 p, int n);

  i64 p() const { return p_; }
  int length() const { return n_; }
  const PolyLayout& layout() const { return layout_; }
  const IntPoly& sum(int i) const { return s_.at(static_cast<size_t>(i)); }
  const IntPoly& product(int i) const { return pr_.at(static_cast<size_t>(i)); }
  /// w_i in the x-block (second = false) or y-block (second = true).
  IntPoly ghost(int i, bool second) const;
  /// Recompute w_i(S) and w_i(P) and compare with w_i(x) +/* w_i(y).
  bool verify_ghost_identities() const;

  /// Witt components of an integer (exact, over Z).
  std::vector<BigInt> integer_components(const BigInt& k) const;

 private:
  WittPolynomialCache(i64 p, int n);
  i64 p_;
  int n_;
  PolyLayout layout_;
  std::vector<IntPoly> s_, pr_;
};

/// Ghost components of an integer Witt vector.
std::vector<BigInt> ghost_components(i64 p, const std::vector<BigInt>& x);

/// W_n(S), optionally modulo W_n(K_*) for a componentwise monomial ideal
/// sequence given by masks (mask[i][k] true means basis monomial k lies in K_i).
class WittRing : public Ring {
 public:
  WittRing(AlgebraPtr base, int n, std::vector<std::vector<bool>> masks = {});

  const MonomialAlgebra& base() const { return *base_; }
  const AlgebraPtr& base_ptr() const { return base_; }
  int length() const { return n_; }
  bool has_quotient() const { return !masks_.empty(); }
  const std::vector<std::vector<bool>>& masks() const { return masks_; }
  const WittPolynomialCache& cache() const { return *cache_; }

  Elem from_components(const std::vector<Vec>& comps) const;
  std::vector<Vec> components(const Elem& a) const;
  Vec component(const Elem& a, int i) const;
  /// Reduce componentwise modulo the quotient ideals.
  Elem canonical(const Elem& a) const;

  Elem teichmuller(const Vec& a) const;
  /// v: W_{n-1} -> W_n; the argument holds n-1 components.
  Elem verschiebung(const std::vector<Vec>& comps) const;
  /// Componentwise Frobenius (characteristic-p base).
  Elem frobenius(const Elem& a) const;
  /// First `len` components.
  std::vector<Vec> truncate(const Elem& a, int len) const;
  /// Ghost components (meaningful for any base; computed in the base).
  std::vector<Vec> ghost(const Elem& a) const;

  std::string describe() const override;
  i64 p() const override { return base_->field().p(); }
  size_t width() const override { return static_cast<size_t>(n_) * base_->rank(); }
  Elem one() const override { return from_int(1); }
  Elem from_int(i64 n) const override;
  Elem add(const Elem& a, const Elem& b) const override;
  Elem neg(const Elem& a) const override;
  Elem mul(const Elem& a, const Elem& b) const override;
  bool is_unit(const Elem& a) const override;
  Elem inverse(const Elem& a) const override;
  std::optional<i64> cardinality() const override;
  Elem element(i64 idx) const override;
  i64 index_of(const Elem& a) const override;
  Elem mod_p(const Elem& a) const override;
  std::string to_string(const Elem& a) const override;

 private:
  struct CompiledTerm {
    i64 coef;
    std::vector<std::pair<int, int>> factors;  // (variable, exponent)
  };
  using Compiled = std::vector<std::vector<CompiledTerm>>;
  Compiled compile(bool product) const;
  /// Unreduced (no quotient) evaluation.
  Elem evaluate(const Compiled& polys, const Elem& a, const Elem& b) const;
  Elem integer_vector(i64 k) const;

  AlgebraPtr base_;
  int n_;
  std::vector<std::vector<bool>> masks_;
  std::shared_ptr<const WittPolynomialCache> cache_;
  Compiled sum_, prod_;
  Elem minus_one_;
  std::vector<std::vector<size_t>> free_coords_;  // unmasked positions per component
};

}  // namespace crystaframe
