#include "crystaframe/intpoly.hpp"

#include <algorithm>

namespace crystaframe {

IntPoly IntPoly::constant(PolyLayout layout, const BigInt& c) {
  IntPoly r(layout);
  r.add_term(0, c);
  return r;
}

IntPoly IntPoly::variable(PolyLayout layout, int var, int exponent) {
  if (var < 0 || var >= layout.nvars) throw AlgebraError("IntPoly: variable index out of range");
  if (static_cast<std::uint64_t>(exponent) > layout.mask()) throw AlgebraError("IntPoly: exponent overflow");
  IntPoly r(layout);
  r.add_term(layout.key_of_var(var, exponent), 1);
  return r;
}

void IntPoly::add_term(std::uint64_t key, const BigInt& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

IntPoly IntPoly::operator+(const IntPoly& o) const {
  IntPoly r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k, c);
  return r;
}

IntPoly IntPoly::operator-(const IntPoly& o) const {
  IntPoly r = *this;
  for (const auto& [k, c] : o.terms_) r.add_term(k, -c);
  return r;
}

IntPoly IntPoly::operator*(const IntPoly& o) const {
  IntPoly r(layout_);
  r.terms_.reserve(terms_.size() * o.terms_.size());
  const std::uint64_t m = layout_.mask();
  for (const auto& [ka, ca] : terms_)
    for (const auto& [kb, cb] : o.terms_) {
      // exponent overflow check per variable
      for (int v = 0; v < layout_.nvars; ++v)
        if (((ka >> (v * layout_.bits)) & m) + ((kb >> (v * layout_.bits)) & m) > m)
          throw AlgebraError("IntPoly: exponent overflow in product");
      r.add_term(ka + kb, ca * cb);
    }
  return r;
}

IntPoly IntPoly::scaled(const BigInt& c) const {
  IntPoly r(layout_);
  if (c == 0) return r;
  for (const auto& [k, a] : terms_) r.terms_.emplace(k, a * c);
  return r;
}

IntPoly IntPoly::pow(unsigned e) const {
  IntPoly r = constant(layout_, 1);
  IntPoly b = *this;
  while (e > 0) {
    if (e & 1u) r = r * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return r;
}

IntPoly IntPoly::divided_exact(const BigInt& d) const {
  IntPoly r(layout_);
  for (const auto& [k, c] : terms_) {
    if (c % d != 0) throw AlgebraError("IntPoly: coefficient not divisible in exact division");
    r.terms_.emplace(k, c / d);
  }
  return r;
}

bool IntPoly::operator==(const IntPoly& o) const { return terms_ == o.terms_; }

IntPoly IntPoly::compose(const std::vector<IntPoly>& values, const PolyLayout& target) const {
  if (static_cast<int>(values.size()) != layout_.nvars) throw AlgebraError("IntPoly::compose: arity mismatch");
  // cache of powers per variable
  std::vector<std::vector<IntPoly>> powers(values.size());
  auto power = [&](int v, int e) -> const IntPoly& {
    auto& pw = powers[static_cast<size_t>(v)];
    if (pw.empty()) pw.push_back(constant(target, 1));
    while (static_cast<int>(pw.size()) <= e) pw.push_back(pw.back() * values[static_cast<size_t>(v)]);
    return pw[static_cast<size_t>(e)];
  };
  IntPoly r(target);
  for (const auto& [k, c] : sorted_terms()) {
    IntPoly t = constant(target, c);
    for (int v = 0; v < layout_.nvars; ++v) {
      int e = layout_.exponent(k, v);
      if (e) t = t * power(v, e);
    }
    r = r + t;
  }
  return r;
}

std::vector<std::pair<std::uint64_t, BigInt>> IntPoly::sorted_terms() const {
  std::vector<std::pair<std::uint64_t, BigInt>> out(terms_.begin(), terms_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace crystaframe
