#pragma once

// Truncated PD envelopes D of monomial ideals over Z/p^m[x_1..x_k],
// presented by divided monomials over a residual monomial basis, modulo the
// span of the instantiated PD relation families.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crystaframe/intpoly.hpp"
#include "crystaframe/ring.hpp"

namespace crystaframe {

using PolyTerms = std::vector<std::pair<Monomial, i64>>;  // integer exponents, integer coefficients

struct PDPresentation {
  i64 p = 2;
  int m = 3;
  std::vector<std::string> vars;
  std::vector<Monomial> generators;  // monomial generators besides the constant p
  int cap = 4;                       // divided degree cap r
  std::vector<PolyTerms> tau;        // sigma(x_i) = x_i^p + p tau_i; empty means tau = 0
};

/// Basis element u * prod_j g_j^[n_j].
struct PDMonomial {
  Monomial residual;
  std::vector<int> dp;
  bool operator<(const PDMonomial& o) const {
    return residual != o.residual ? residual < o.residual : dp < o.dp;
  }
  bool operator==(const PDMonomial& o) const { return residual == o.residual && dp == o.dp; }
};

class PDAlgebra;
using PDPtr = std::shared_ptr<const PDAlgebra>;

class PDAlgebra : public Ring {
 public:
  static PDPtr build(const PDPresentation& pres);

  const PDPresentation& presentation() const { return pres_; }
  const CoefficientRing& coefficients() const { return ring_; }
  /// Generators are p together with all variables, each in degree one.
  bool regular() const { return regular_; }
  int cap() const { return pres_.cap; }
  const std::vector<PDMonomial>& basis() const { return basis_; }
  const std::vector<Monomial>& residuals() const { return residuals_; }
  std::optional<size_t> index_of(const PDMonomial& b) const;
  /// Basis elements of positive divided degree span the ideal together with p.
  bool positive(size_t idx) const;
  const HowellForm& relations() const { return *rel_; }
  int relation_rank_log_p() const { return rel_->log_p_size(); }

  // Ring interface
  std::string describe() const override;
  i64 p() const override { return pres_.p; }
  size_t width() const override { return basis_.size(); }
  Elem one() const override;
  Elem from_int(i64 n) const override;
  Elem add(const Elem& a, const Elem& b) const override;
  Elem neg(const Elem& a) const override;
  Elem mul(const Elem& a, const Elem& b) const override;
  bool is_unit(const Elem& a) const override;
  Elem inverse(const Elem& a) const override;
  std::optional<i64> cardinality() const override;
  Elem element(i64 idx) const override;
  i64 index_of(const Elem& a) const override;
  const CoefficientRing* scalars() const override { return &ring_; }
  Elem normalize(const Vec& coords) const override;
  std::vector<Vec> relation_rows() const override { return rel_->rows(); }
  Elem mod_p(const Elem& a) const override;
  std::string to_string(const Elem& a) const override;

  Elem basis_element(size_t idx, i64 c = 1) const;
  Elem scale(i64 c, const Elem& a) const;
  /// g_j^[n] (j indexes the non-p generators).
  Elem generator_power(size_t j, int n) const;
  /// x_i as an element of D.
  Elem variable(size_t i) const;
  /// Image of a monomial of A.
  Elem monomial(const Monomial& mu) const;
  Elem polynomial(const PolyTerms& f) const;
  /// Unreduced product of coordinate vectors (no relation reduction).
  Vec raw_mul(const Vec& a, const Vec& b) const;

  // Frame structure
  Elem sigma(const Elem& a) const;
  /// sigma_1 on a combination of positive-degree basis elements.
  Elem sigma1_positive(const Vec& z) const;
  /// sigma_1(p y + z).
  Elem sigma1(const Elem& y, const Vec& z) const;
  const Elem& sigma1_of_basis(size_t idx) const { return sigma1_basis_.at(idx); }
  /// Split an element of the ideal into (y, z) with a = p y + z; nullopt if a is not in the ideal.
  std::optional<std::pair<Elem, Vec>> ideal_witness(const Elem& a) const;
  bool in_ideal(const Elem& a) const { return ideal_witness(a).has_value(); }
  /// First relation row whose sigma (resp. sigma_1) leaves the relation span
  /// (sigma exactly, sigma_1 modulo p^{m-1}).
  std::optional<std::string> well_definedness_defect() const;

  // Torsion
  struct TorsionReport {
    std::vector<Elem> witnesses;  // p t = 0, t not in p^{m-1} D
    int free_rank_lower = 0;      // number of basis coordinates modulo the relation span
    std::string level;            // truncation level tag
  };
  TorsionReport torsion_probe() const;

  // Differentials: coefficients of Omega live in the envelope of cap r-1.
  const PDAlgebra& lower() const;
  Elem project_lower(const Elem& a) const;
  /// d/dx_i as a map D_r -> D_{r-1}.
  Elem partial(const Elem& a, size_t var) const;
  /// (dsigma)_1(dx_i) as k coefficients in D_{r-1}.
  std::vector<Elem> dsigma1_dx(size_t var) const;

 private:
  PDAlgebra(const PDPresentation& pres);
  void construct();
  using Sparse = std::vector<std::pair<size_t, i64>>;
  Vec reduce_monomial(const Monomial& mu) const;  // greedy rewriting, unreduced coordinates
  Vec shift_divided(const Vec& a, const std::vector<int>& dp) const;  // multiply by prod g_j^[dp_j]
  Vec multiply_basis(size_t a, size_t b) const;
  Vec sigma_of_basis(size_t idx) const;
  Vec gen_sigma_power(size_t j, int n) const;

  PDPresentation pres_;
  CoefficientRing ring_;
  bool regular_ = false;
  std::vector<Monomial> residuals_;
  std::vector<PDMonomial> basis_;
  std::map<PDMonomial, size_t> index_;
  std::vector<Sparse> mul_table_;  // |B|^2, unreduced
  std::unique_ptr<HowellForm> rel_;
  std::vector<Elem> sigma_basis_;
  std::vector<Elem> sigma1_basis_;
  std::vector<IntPoly> h_;  // sigma(g_j) = g_j^p + p h_j
  std::unique_ptr<HowellForm> rel_mod_p_;      // relations plus p D
  std::unique_ptr<HowellForm> rel_mod_pm1_;    // relations plus p^{m-1} D
  std::vector<std::vector<Elem>> partial_basis_;  // [var][basis] in D_{r-1}
  std::vector<std::string> gen_names_;
  std::shared_ptr<const PDAlgebra> lower_;
};

}  // namespace crystaframe
