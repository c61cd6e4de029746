#include "crystaframe/ring.hpp"

#include <sstream>

namespace crystaframe {

Elem Ring::pow(const Elem& a, i64 e) const {
  Elem r = one(), b = a;
  while (e > 0) {
    if (e & 1) r = mul(r, b);
    b = mul(b, b);
    e >>= 1;
  }
  return r;
}

std::vector<Elem> Ring::coordinate_basis() const {
  if (!is_linear()) throw AlgebraError("coordinate_basis: ring has no linear structure");
  std::vector<Elem> out;
  for (size_t i = 0; i < width(); ++i) {
    Vec e(width(), 0);
    e[i] = 1;
    out.push_back(normalize(e));
  }
  return out;
}

std::string Ring::to_string(const Elem& a) const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ")";
  return os.str();
}

std::string ResidueRing::describe() const { return "Z/" + std::to_string(ring_.modulus()); }

const CoefficientRing* AlgebraRing::scalars() const {
  if (alg_->field().degree() != 1) return nullptr;
  return &alg_->field().prime_ring();
}

i64 AlgebraRing::index_of(const Elem& a) const {
  i64 idx = 0;
  for (size_t i = a.size(); i-- > 0;) idx = idx * alg_->field().size() + a[i];
  return idx;
}

Elem AlgebraRing::mod_p(const Elem& a) const {
  if (alg_->field().degree() != 1) return a;  // already characteristic p
  Elem r = a;
  for (auto& x : r) x %= alg_->field().p();
  return r;
}

}  // namespace crystaframe
