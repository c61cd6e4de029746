#pragma once

// A small runtime interface over the finite carriers used by frames and
// windows. Elements are flat integer vectors in a canonical form, so that
// equality is vector equality.

#include <memory>
#include <optional>
#include <string>

#include "crystaframe/monomial_algebra.hpp"

namespace crystaframe {

using Elem = Vec;

class Ring {
 public:
  virtual ~Ring() = default;

  virtual std::string describe() const = 0;
  virtual i64 p() const = 0;
  /// Length of the element vectors.
  virtual size_t width() const = 0;

  virtual Elem zero() const { return Elem(width(), 0); }
  virtual Elem one() const = 0;
  virtual Elem from_int(i64 n) const = 0;
  virtual Elem add(const Elem& a, const Elem& b) const = 0;
  virtual Elem neg(const Elem& a) const = 0;
  virtual Elem mul(const Elem& a, const Elem& b) const = 0;
  Elem sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }
  bool eq(const Elem& a, const Elem& b) const { return a == b; }
  bool is_zero(const Elem& a) const { return crystaframe::is_zero(a); }
  Elem times_int(i64 n, const Elem& a) const { return mul(from_int(n), a); }
  Elem pow(const Elem& a, i64 e) const;

  virtual bool is_unit(const Elem& a) const = 0;
  virtual Elem inverse(const Elem& a) const = 0;

  /// Number of elements, when finite and representable.
  virtual std::optional<i64> cardinality() const = 0;
  /// Deterministic enumeration, 0 <= idx < cardinality().
  virtual Elem element(i64 idx) const = 0;
  /// Inverse of element() on canonical forms.
  virtual i64 index_of(const Elem& a) const = 0;

  /// When the ring is a free-coordinate module over Z/p^m (modulo an
  /// optional relation span), elements are their own coordinate vectors.
  virtual const CoefficientRing* scalars() const { return nullptr; }
  bool is_linear() const { return scalars() != nullptr; }
  /// Canonical form of an arbitrary coordinate vector (linear rings only).
  virtual Elem normalize(const Vec& coords) const { return coords; }
  /// Coordinate basis of the ring as a Z/p^m-module (linear rings only).
  std::vector<Elem> coordinate_basis() const;
  /// Generators of the relation span that normalize() reduces modulo.
  virtual std::vector<Vec> relation_rows() const { return {}; }

  /// Reduction modulo p, as a canonical key.
  virtual Elem mod_p(const Elem& a) const = 0;

  virtual std::string to_string(const Elem& a) const;
};

using RingPtr = std::shared_ptr<const Ring>;

/// Z/p^m.
class ResidueRing : public Ring {
 public:
  ResidueRing(i64 p, int m) : ring_(p, m) {}
  const CoefficientRing& coefficients() const { return ring_; }

  std::string describe() const override;
  i64 p() const override { return ring_.p(); }
  size_t width() const override { return 1; }
  Elem one() const override { return {1 % ring_.modulus()}; }
  Elem from_int(i64 n) const override { return {ring_.reduce(n)}; }
  Elem add(const Elem& a, const Elem& b) const override { return {ring_.add(a[0], b[0])}; }
  Elem neg(const Elem& a) const override { return {ring_.neg(a[0])}; }
  Elem mul(const Elem& a, const Elem& b) const override { return {ring_.mul(a[0], b[0])}; }
  bool is_unit(const Elem& a) const override { return ring_.is_unit(a[0]); }
  Elem inverse(const Elem& a) const override { return {ring_.inverse(a[0])}; }
  std::optional<i64> cardinality() const override { return ring_.modulus(); }
  Elem element(i64 idx) const override { return {idx}; }
  i64 index_of(const Elem& a) const override { return a[0]; }
  const CoefficientRing* scalars() const override { return &ring_; }
  Elem mod_p(const Elem& a) const override { return {a[0] % ring_.p()}; }
  std::string to_string(const Elem& a) const override { return std::to_string(a[0]); }

 private:
  CoefficientRing ring_;
};

/// A monomial algebra viewed as a ring.
class AlgebraRing : public Ring {
 public:
  explicit AlgebraRing(AlgebraPtr alg) : alg_(std::move(alg)) {}
  const MonomialAlgebra& algebra() const { return *alg_; }
  const AlgebraPtr& algebra_ptr() const { return alg_; }

  std::string describe() const override { return alg_->describe(); }
  i64 p() const override { return alg_->field().p(); }
  size_t width() const override { return alg_->rank(); }
  Elem one() const override { return alg_->one(); }
  Elem from_int(i64 n) const override { return alg_->constant(n); }
  Elem add(const Elem& a, const Elem& b) const override { return alg_->add(a, b); }
  Elem neg(const Elem& a) const override { return alg_->neg(a); }
  Elem mul(const Elem& a, const Elem& b) const override { return alg_->mul(a, b); }
  bool is_unit(const Elem& a) const override { return alg_->is_unit(a); }
  Elem inverse(const Elem& a) const override { return alg_->inverse(a); }
  std::optional<i64> cardinality() const override { return alg_->cardinality(); }
  Elem element(i64 idx) const override { return alg_->element_from_index(idx); }
  i64 index_of(const Elem& a) const override;
  const CoefficientRing* scalars() const override;
  Elem mod_p(const Elem& a) const override;
  std::string to_string(const Elem& a) const override { return alg_->to_string(a); }

 private:
  AlgebraPtr alg_;
};

}  // namespace crystaframe
