#include "crystaframe/witt.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace crystaframe {

namespace {
int bit_length(i64 v) {
  int b = 0;
  while (v > 0) {
    ++b;
    v >>= 1;
  }
  return b;
}

BigInt big_pow(i64 p, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}
}  // namespace

WittPolynomialCache::WittPolynomialCache(i64 p, int n) : p_(p), n_(n) {
  if (!is_prime(p)) throw AlgebraError("Witt polynomials: p must be prime");
  if (n < 1) throw AlgebraError("Witt polynomials: length must be >= 1");
  layout_.nvars = 2 * n;
  layout_.bits = bit_length(ipow(p, n - 1)) + 1;
  if (layout_.nvars * layout_.bits > 64)
    throw AlgebraError("Witt polynomials: (p, n) = (" + std::to_string(p) + ", " + std::to_string(n) +
                       ") exceeds the packed exponent range");
  for (int i = 0; i < n; ++i) {
    IntPoly wsum = ghost(i, false) + ghost(i, true);
    IntPoly wprod = ghost(i, false) * ghost(i, true);
    for (int j = 0; j < i; ++j) {
      unsigned e = static_cast<unsigned>(ipow(p, i - j));
      BigInt pj = big_pow(p, j);
      wsum = wsum - s_[static_cast<size_t>(j)].pow(e).scaled(pj);
      wprod = wprod - pr_[static_cast<size_t>(j)].pow(e).scaled(pj);
    }
    BigInt pi = big_pow(p, i);
    s_.push_back(wsum.divided_exact(pi));
    pr_.push_back(wprod.divided_exact(pi));
  }
}

std::shared_ptr<const WittPolynomialCache> WittPolynomialCache::get(i64 p, int n) {
  static std::mutex mu;
  static std::map<std::pair<i64, int>, std::shared_ptr<const WittPolynomialCache>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(p, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const WittPolynomialCache> c(new WittPolynomialCache(p, n));
  cache.emplace(key, c);
  return c;
}

IntPoly WittPolynomialCache::ghost(int i, bool second) const {
  IntPoly w(layout_);
  const int off = second ? n_ : 0;
  for (int j = 0; j <= i; ++j)
    w = w + IntPoly::variable(layout_, off + j, static_cast<int>(ipow(p_, i - j))).scaled(big_pow(p_, j));
  return w;
}

bool WittPolynomialCache::verify_ghost_identities() const {
  // substitute S (resp. P) into the ghost polynomial w_i of a single Witt vector
  for (int i = 0; i < n_; ++i) {
    IntPoly ws(layout_), wp(layout_);
    for (int j = 0; j <= i; ++j) {
      unsigned e = static_cast<unsigned>(ipow(p_, i - j));
      ws = ws + s_[static_cast<size_t>(j)].pow(e).scaled(big_pow(p_, j));
      wp = wp + pr_[static_cast<size_t>(j)].pow(e).scaled(big_pow(p_, j));
    }
    if (!(ws == ghost(i, false) + ghost(i, true))) return false;
    if (!(wp == ghost(i, false) * ghost(i, true))) return false;
  }
  return true;
}

std::vector<BigInt> WittPolynomialCache::integer_components(const BigInt& k) const {
  std::vector<BigInt> x;
  for (int i = 0; i < n_; ++i) {
    BigInt rest = k;
    for (int j = 0; j < i; ++j) rest -= big_pow(p_, j) * boost::multiprecision::pow(x[static_cast<size_t>(j)], static_cast<unsigned>(ipow(p_, i - j)));
    BigInt pi = big_pow(p_, i);
    if (rest % pi != 0) throw AlgebraError("integer_components: non-integral Witt component");
    x.push_back(rest / pi);
  }
  return x;
}

std::vector<BigInt> ghost_components(i64 p, const std::vector<BigInt>& x) {
  std::vector<BigInt> w;
  for (size_t i = 0; i < x.size(); ++i) {
    BigInt s = 0;
    for (size_t j = 0; j <= i; ++j)
      s += big_pow(p, static_cast<int>(j)) * boost::multiprecision::pow(x[j], static_cast<unsigned>(ipow(p, static_cast<int>(i - j))));
    w.push_back(s);
  }
  return w;
}

// ------------------------------------------------------------------ WittRing

WittRing::WittRing(AlgebraPtr base, int n, std::vector<std::vector<bool>> masks)
    : base_(std::move(base)), n_(n), masks_(std::move(masks)) {
  if (n < 1) throw AlgebraError("WittRing: length must be >= 1");
  if (!masks_.empty()) {
    if (static_cast<int>(masks_.size()) != n) throw AlgebraError("WittRing: need one ideal per component");
    for (const auto& m : masks_)
      if (m.size() != base_->rank()) throw AlgebraError("WittRing: ideal mask size mismatch");
  }
  cache_ = WittPolynomialCache::get(base_->field().p(), n);
  sum_ = compile(false);
  prod_ = compile(true);
  free_coords_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (size_t k = 0; k < base_->rank(); ++k)
      if (masks_.empty() || !masks_[static_cast<size_t>(i)][k]) free_coords_[static_cast<size_t>(i)].push_back(k);
  minus_one_ = integer_vector(-1);
}

WittRing::Compiled WittRing::compile(bool product) const {
  const BigInt q = base_->field().degree() > 1 ? BigInt(base_->field().p()) : BigInt(base_->field().size());
  Compiled out;
  for (int i = 0; i < n_; ++i) {
    const IntPoly& poly = product ? cache_->product(i) : cache_->sum(i);
    std::vector<CompiledTerm> terms;
    for (const auto& [key, c] : poly.sorted_terms()) {
      BigInt r = c % q;
      if (r < 0) r += q;
      if (r == 0) continue;
      CompiledTerm t;
      t.coef = static_cast<i64>(r);
      for (int v = 0; v < 2 * n_; ++v) {
        int e = cache_->layout().exponent(key, v);
        if (e) t.factors.emplace_back(v, e);
      }
      terms.push_back(std::move(t));
    }
    out.push_back(std::move(terms));
  }
  return out;
}

Elem WittRing::evaluate(const Compiled& polys, const Elem& a, const Elem& b) const {
  const MonomialAlgebra& alg = *base_;
  std::vector<Vec> vars;
  for (int i = 0; i < n_; ++i) vars.push_back(component(a, i));
  for (int i = 0; i < n_; ++i) vars.push_back(component(b, i));
  std::vector<bool> zero(vars.size());
  for (size_t v = 0; v < vars.size(); ++v) zero[v] = alg.is_zero(vars[v]);
  std::vector<std::vector<Vec>> powers(vars.size());
  auto power = [&](int v, int e) -> const Vec& {
    auto& pw = powers[static_cast<size_t>(v)];
    if (pw.empty()) pw.push_back(alg.one());
    while (static_cast<int>(pw.size()) <= e) pw.push_back(alg.mul(pw.back(), vars[static_cast<size_t>(v)]));
    return pw[static_cast<size_t>(e)];
  };
  std::vector<Vec> comps;
  for (int i = 0; i < n_; ++i) {
    Vec acc = alg.zero();
    for (const auto& t : polys[static_cast<size_t>(i)]) {
      bool vanish = false;
      for (const auto& f : t.factors)
        if (zero[static_cast<size_t>(f.first)]) {
          vanish = true;
          break;
        }
      if (vanish) continue;
      Vec term = alg.constant(t.coef);
      for (const auto& f : t.factors) term = alg.mul(term, power(f.first, f.second));
      acc = alg.add(acc, term);
    }
    comps.push_back(std::move(acc));
  }
  Elem out;
  for (const auto& c : comps) out.insert(out.end(), c.begin(), c.end());
  return out;
}

Elem WittRing::from_components(const std::vector<Vec>& comps) const {
  if (static_cast<int>(comps.size()) != n_) throw AlgebraError("WittRing: wrong number of components");
  Elem e;
  e.reserve(width());
  for (const auto& c : comps) {
    if (c.size() != base_->rank()) throw AlgebraError("WittRing: component of wrong size");
    e.insert(e.end(), c.begin(), c.end());
  }
  return canonical(e);
}

std::vector<Vec> WittRing::components(const Elem& a) const {
  std::vector<Vec> out;
  for (int i = 0; i < n_; ++i) out.push_back(component(a, i));
  return out;
}

Vec WittRing::component(const Elem& a, int i) const {
  const size_t r = base_->rank();
  return Vec(a.begin() + static_cast<long>(static_cast<size_t>(i) * r),
             a.begin() + static_cast<long>(static_cast<size_t>(i + 1) * r));
}

Elem WittRing::canonical(const Elem& a) const {
  if (masks_.empty()) return a;
  // Cosets of W(K_*) are not componentwise: subtract V^i[m_i] in turn, where
  // m_i is the K_i-part of the current i-th component.
  Elem r = a;
  const size_t rk = base_->rank();
  for (int i = 0; i < n_; ++i) {
    Elem v(width(), 0);
    bool any = false;
    for (size_t k = 0; k < rk; ++k) {
      const size_t pos = static_cast<size_t>(i) * rk + k;
      if (masks_[static_cast<size_t>(i)][k] && r[pos] != 0) {
        v[pos] = r[pos];
        any = true;
      }
    }
    if (!any) continue;
    r = evaluate(sum_, r, evaluate(prod_, minus_one_, v));
  }
  return r;
}

Elem WittRing::teichmuller(const Vec& a) const {
  std::vector<Vec> comps(static_cast<size_t>(n_), base_->zero());
  comps[0] = a;
  return from_components(comps);
}

Elem WittRing::verschiebung(const std::vector<Vec>& comps) const {
  if (static_cast<int>(comps.size()) != n_ - 1) throw AlgebraError("verschiebung: expects n-1 components");
  std::vector<Vec> out{base_->zero()};
  out.insert(out.end(), comps.begin(), comps.end());
  return from_components(out);
}

Elem WittRing::frobenius(const Elem& a) const {
  if (!base_->field().char_p()) throw AlgebraError("Witt frobenius: base must have characteristic p");
  std::vector<Vec> comps;
  for (int i = 0; i < n_; ++i) comps.push_back(base_->frobenius(component(a, i)));
  return from_components(comps);
}

std::vector<Vec> WittRing::truncate(const Elem& a, int len) const {
  if (len > n_) throw AlgebraError("truncate: length exceeds carrier");
  std::vector<Vec> out;
  for (int i = 0; i < len; ++i) out.push_back(component(a, i));
  return out;
}

std::vector<Vec> WittRing::ghost(const Elem& a) const {
  std::vector<Vec> out;
  const i64 p = base_->field().p();
  for (int i = 0; i < n_; ++i) {
    Vec s = base_->zero();
    for (int j = 0; j <= i; ++j)
      s = base_->add(s, base_->scale(base_->field().from_int(ipow(p, j)), base_->pow(component(a, j), ipow(p, i - j))));
    out.push_back(s);
  }
  return out;
}

std::string WittRing::describe() const {
  std::ostringstream os;
  os << (masks_.empty() ? "W_" : "A(K)_") << n_ << "(" << base_->describe() << ")";
  return os.str();
}

Elem WittRing::from_int(i64 k) const { return canonical(integer_vector(k)); }

Elem WittRing::integer_vector(i64 k) const {
  auto ints = cache_->integer_components(BigInt(k));
  const BigInt q = base_->field().degree() > 1 ? BigInt(base_->field().p()) : BigInt(base_->field().size());
  std::vector<Vec> comps;
  for (const auto& c : ints) {
    BigInt r = c % q;
    if (r < 0) r += q;
    comps.push_back(base_->constant(static_cast<i64>(r)));
  }
  Elem out;
  for (const auto& c : comps) out.insert(out.end(), c.begin(), c.end());
  return out;
}

Elem WittRing::add(const Elem& a, const Elem& b) const { return canonical(evaluate(sum_, a, b)); }

Elem WittRing::neg(const Elem& a) const { return mul(minus_one_, a); }

Elem WittRing::mul(const Elem& a, const Elem& b) const { return canonical(evaluate(prod_, a, b)); }

bool WittRing::is_unit(const Elem& a) const { return base_->is_unit(component(a, 0)); }

Elem WittRing::inverse(const Elem& a) const {
  if (!is_unit(a)) throw AlgebraError("Witt inverse of a non-unit");
  // Newton iteration y <- y(2 - a y); the kernel of W_n -> R is nilpotent
  Elem y = teichmuller(base_->inverse(component(a, 0)));
  const Elem two = from_int(2);
  const Elem e = one();
  for (int it = 0; it < 4 * n_ + 8; ++it) {
    Elem ay = mul(a, y);
    if (ay == e) return y;
    y = mul(y, sub(two, ay));
  }
  throw AlgebraError("Witt inverse: Newton iteration did not converge");
}

std::optional<i64> WittRing::cardinality() const {
  i128 c = 1;
  for (const auto& fc : free_coords_)
    for (size_t k = 0; k < fc.size(); ++k) {
      c *= base_->field().size();
      if (c > (i128{1} << 50)) return std::nullopt;
    }
  return static_cast<i64>(c);
}

Elem WittRing::element(i64 idx) const {
  Elem e(width(), 0);
  const i64 q = base_->field().size();
  const size_t rk = base_->rank();
  for (int i = 0; i < n_; ++i)
    for (size_t k : free_coords_[static_cast<size_t>(i)]) {
      e[static_cast<size_t>(i) * rk + k] = idx % q;
      idx /= q;
    }
  return e;
}

i64 WittRing::index_of(const Elem& a) const {
  const i64 q = base_->field().size();
  const size_t rk = base_->rank();
  i64 idx = 0;
  for (int i = n_; i-- > 0;) {
    const auto& fc = free_coords_[static_cast<size_t>(i)];
    for (size_t t = fc.size(); t-- > 0;) idx = idx * q + a[static_cast<size_t>(i) * rk + fc[t]];
  }
  return idx;
}

Elem WittRing::mod_p(const Elem& a) const {
  if (!base_->is_perfect())
    throw AlgebraError("reduction mod p of Witt vectors is implemented for perfect bases only");
  return component(a, 0);
}

std::string WittRing::to_string(const Elem& a) const {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < n_; ++i) os << (i ? "; " : "") << base_->to_string(component(a, i));
  os << ")";
  return os.str();
}

}  // namespace crystaframe
