#include "crystaframe/pdenv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace crystaframe {

namespace {

bool divides(const Monomial& a, const Monomial& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Monomial mono_div(const Monomial& a, const Monomial& b) {
  Monomial r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Monomial mono_pow(const Monomial& a, int n) {
  Monomial r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * n;
  return r;
}

int total(const std::vector<int>& v) {
  int s = 0;
  for (int x : v) s += x;
  return s;
}

i64 binom_mod(int n, int k, const CoefficientRing& ring) {
  if (k < 0 || k > n) return 0;
  // exact binomial via Pascal in 128 bits for the small degrees used here
  i128 r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return ring.reduce128(r);
}

/// (pk)!/k! mod p^m.
i64 pk_factorial_ratio(i64 k, const CoefficientRing& ring) {
  const i64 p = ring.p();
  int v = vp_factorial(p * k, p) - vp_factorial(k, p);
  if (v >= ring.m()) return 0;
  i64 unit = ring.mul(ring.factorial_unit(p * k), ring.inverse(ring.factorial_unit(k)));
  return ring.mul(ipow(p, v), unit);
}

std::string mono_string(const Monomial& mu, const std::vector<std::string>& vars) {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0) continue;
    if (!first) os << "*";
    first = false;
    os << vars[i];
    if (mu[i] != 1) os << "^" << mu[i];
  }
  if (first) os << "1";
  return os.str();
}

}  // namespace

PDAlgebra::PDAlgebra(const PDPresentation& pres) : pres_(pres), ring_(pres.p, pres.m) {}

PDPtr PDAlgebra::build(const PDPresentation& pres) {
  if (pres.cap < 1) throw AlgebraError("PD envelope: cap must be >= 1");
  std::shared_ptr<PDAlgebra> d(new PDAlgebra(pres));
  d->construct();
  return d;
}

void PDAlgebra::construct() {
  const size_t k = pres_.vars.size();
  const size_t s = pres_.generators.size();
  const int r = pres_.cap;
  const i64 p = pres_.p;
  for (const auto& g : pres_.generators) {
    if (g.size() != k) throw AlgebraError("PD envelope: generator arity mismatch");
    if (std::all_of(g.begin(), g.end(), [](int e) { return e == 0; }))
      throw AlgebraError("PD envelope: the unit monomial cannot be a PD generator");
    if (std::any_of(g.begin(), g.end(), [](int e) { return e < 0; }))
      throw AlgebraError("PD envelope: non-monomial generator");
  }
  // regular: generators are exactly the variables
  regular_ = s == k;
  for (size_t j = 0; j < s && regular_; ++j) {
    int deg = total(pres_.generators[j]);
    regular_ = deg == 1 && pres_.generators[j][j] == 1;
  }
  bool tau_nonzero = false;
  if (!pres_.tau.empty()) {
    if (pres_.tau.size() != k) throw AlgebraError("PD envelope: tau needs one polynomial per variable");
    for (const auto& t : pres_.tau)
      for (const auto& [mu, c] : t) {
        if (mu.size() != k) throw AlgebraError("PD envelope: tau term arity mismatch");
        if (c % p == 0 && ring_.reduce(c) == 0) continue;
        if (total(mu) == 0) throw AlgebraError("PD envelope: tau must have no constant term");
        tau_nonzero = true;
      }
  }
  if (tau_nonzero && !regular_)
    throw AlgebraError("PD envelope: a nonzero tau requires the regular presentation (p, x_1..x_k)");
  for (const auto& g : pres_.generators) {
    std::ostringstream os;
    os << (total(g) == 1 ? mono_string(g, pres_.vars) : "(" + mono_string(g, pres_.vars) + ")");
    gen_names_.push_back(os.str());
  }

  // residual monomials: bounded by pure powers among the generators
  std::vector<int> bound(k, -1);
  for (const auto& g : pres_.generators) {
    int nz = 0;
    size_t var = 0;
    for (size_t i = 0; i < k; ++i)
      if (g[i] > 0) {
        ++nz;
        var = i;
      }
    if (nz == 1 && (bound[var] < 0 || g[var] < bound[var])) bound[var] = g[var];
  }
  for (size_t i = 0; i < k; ++i)
    if (bound[i] < 0)
      throw AlgebraError("PD envelope: residual basis is infinite (no pure power of " + pres_.vars[i] +
                         " among the generators)");
  {
    Monomial cur(k, 0);
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == k) {
        bool res = std::none_of(pres_.generators.begin(), pres_.generators.end(),
                                [&](const Monomial& g) { return divides(g, cur); });
        if (res) residuals_.push_back(cur);
        return;
      }
      for (int e = 0; e < bound[i]; ++e) {
        cur[i] = e;
        rec(i + 1);
      }
      cur[i] = 0;
    };
    rec(0);
  }
  // divided monomials with total degree < r
  std::vector<std::vector<int>> dps;
  {
    std::vector<int> cur(s, 0);
    std::function<void(size_t, int)> rec = [&](size_t j, int left) {
      if (j == s) {
        dps.push_back(cur);
        return;
      }
      for (int e = 0; e <= left; ++e) {
        cur[j] = e;
        rec(j + 1, left - e);
      }
      cur[j] = 0;
    };
    rec(0, r - 1);
  }
  for (const auto& u : residuals_)
    for (const auto& dp : dps) basis_.push_back({u, dp});
  if (basis_.size() > 2000) throw BudgetExceeded("PD envelope basis exceeds 2000 elements");
  for (size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = i;
  const size_t n = basis_.size();

  // multiplication table (unreduced)
  mul_table_.assign(n * n, {});
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a; b < n; ++b) {
      Vec prod = multiply_basis(a, b);
      Sparse sp;
      for (size_t i = 0; i < n; ++i)
        if (prod[i] != 0) sp.emplace_back(i, prod[i]);
      mul_table_[a * n + b] = sp;
      mul_table_[b * n + a] = sp;
    }

  // relation seeds
  Mat seeds;
  std::set<Monomial> monos;
  auto add_divisors = [&](const Monomial& mu) {
    Monomial cur(k, 0);
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == k) {
        monos.insert(cur);
        return;
      }
      for (int e = 0; e <= mu[i]; ++e) {
        cur[i] = e;
        rec(i + 1);
      }
      cur[i] = 0;
    };
    rec(0);
  };
  for (const auto& u : residuals_)
    for (const auto& v : residuals_) add_divisors(mono_mul(u, v));
  auto push_seed = [&](Vec v) {
    for (auto& x : v) x = ring_.reduce(x);
    if (!is_zero(v)) seeds.push_back(std::move(v));
  };
  for (size_t i = 0; i < s; ++i)
    for (size_t j = i + 1; j < s; ++j) {
      const Monomial& gi = pres_.generators[i];
      const Monomial& gj = pres_.generators[j];
      Monomial l(k);
      for (size_t t = 0; t < k; ++t) l[t] = std::max(gi[t], gj[t]);
      Monomial c = mono_div(l, gi), cp = mono_div(l, gj);
      for (int e = 1; e < r; ++e) {
        std::vector<int> di(s, 0), dj(s, 0);
        di[i] = e;
        dj[j] = e;
        Vec lhs = shift_divided(reduce_monomial(mono_pow(c, e)), di);
        Vec rhs = shift_divided(reduce_monomial(mono_pow(cp, e)), dj);
        Vec diff(n);
        for (size_t t = 0; t < n; ++t) diff[t] = ring_.sub(lhs[t], rhs[t]);
        push_seed(diff);
        add_divisors(mono_pow(c, e));
        add_divisors(mono_pow(cp, e));
      }
    }
  for (const auto& mu : monos)
    for (size_t j = 0; j < s; ++j) {
      if (!divides(pres_.generators[j], mu)) continue;
      std::vector<int> dj(s, 0);
      dj[j] = 1;
      Vec alt = shift_divided(reduce_monomial(mono_div(mu, pres_.generators[j])), dj);
      Vec can = reduce_monomial(mu);
      Vec diff(n);
      for (size_t t = 0; t < n; ++t) diff[t] = ring_.sub(alt[t], can[t]);
      push_seed(diff);
    }

  // close the span under multiplication by basis elements
  rel_ = std::make_unique<HowellForm>(ring_, n, seeds);
  for (int round = 0; round < 64; ++round) {
    Mat extra;
    for (const auto& row : rel_->rows())
      for (size_t b = 0; b < n; ++b) {
        Vec e(n, 0);
        e[b] = 1;
        Vec prod = raw_mul(row, e);
        Vec red = rel_->reduce(prod);
        if (!is_zero(red)) extra.push_back(red);
      }
    if (extra.empty()) break;
    if (round == 63) throw AlgebraError("PD envelope: relation closure did not stabilize");
    rel_->add_rows(extra);
  }
  {
    Mat rows = rel_->rows();
    Mat rows1 = rows;
    for (size_t i = 0; i < n; ++i) {
      Vec e(n, 0);
      e[i] = p % ring_.modulus();
      rows.push_back(e);
      Vec f(n, 0);
      f[i] = ipow(p, pres_.m - 1) % ring_.modulus();
      rows1.push_back(f);
    }
    rel_mod_p_ = std::make_unique<HowellForm>(ring_, n, rows);
    rel_mod_pm1_ = std::make_unique<HowellForm>(ring_, n, rows1);
  }

  // sigma(g_j) = g_j^p + p h_j over Z
  PolyLayout lay;
  lay.nvars = static_cast<int>(std::max<size_t>(k, 1));
  lay.bits = 64 / lay.nvars > 16 ? 16 : 64 / lay.nvars;
  std::vector<IntPoly> sig_x;
  for (size_t i = 0; i < k; ++i) {
    IntPoly sx = IntPoly::variable(lay, static_cast<int>(i), static_cast<int>(p));
    if (!pres_.tau.empty())
      for (const auto& [mu, c] : pres_.tau[i]) {
        IntPoly t = IntPoly::constant(lay, BigInt(c) * p);
        for (size_t v = 0; v < k; ++v)
          if (mu[v]) t = t * IntPoly::variable(lay, static_cast<int>(v), mu[v]);
        sx = sx + t;
      }
    sig_x.push_back(sx);
  }
  for (size_t j = 0; j < s; ++j) {
    IntPoly sg = IntPoly::constant(lay, 1), gp = IntPoly::constant(lay, 1);
    for (size_t i = 0; i < k; ++i) {
      const int e = pres_.generators[j][i];
      if (!e) continue;
      sg = sg * sig_x[i].pow(static_cast<unsigned>(e));
      gp = gp * IntPoly::variable(lay, static_cast<int>(i), static_cast<int>(e * p));
    }
    h_.push_back((sg - gp).divided_exact(p));
  }
  sigma_basis_.resize(n);
  for (size_t b = 0; b < n; ++b) sigma_basis_[b] = normalize(sigma_of_basis(b));

  // sigma_1 on positive basis elements
  auto poly_to_elem = [&](const IntPoly& f) {
    PolyTerms terms;
    for (const auto& [key, c] : f.sorted_terms()) {
      Monomial mu(k);
      for (size_t v = 0; v < k; ++v) mu[v] = lay.exponent(key, static_cast<int>(v));
      BigInt cr = c % ring_.modulus();
      terms.emplace_back(mu, static_cast<i64>(cr));
    }
    return polynomial(terms);
  };
  std::vector<Elem> s1_gen(s);
  for (size_t j = 0; j < s; ++j) {
    // (p-1)! g^[p] + h
    Elem v = poly_to_elem(h_[j]);
    if (p < r) {
      std::vector<int> dp(s, 0);
      dp[j] = static_cast<int>(p);
      Elem gpow = basis_element(*index_of({residuals_[0], dp}), ring_.factorial_unit(p - 1));
      v = add(v, gpow);
    }
    s1_gen[j] = v;
  }
  sigma1_basis_.assign(n, zero());
  for (size_t b = 0; b < n; ++b) {
    if (!positive(b)) continue;
    const auto& bm = basis_[b];
    Elem acc = normalize(reduce_monomial(bm.residual));
    acc = sigma(acc);
    int factors = 0;
    for (size_t j = 0; j < s; ++j) {
      int nj = bm.dp[j];
      if (nj == 0) continue;
      ++factors;
      Elem t = scale(p_power_over_factorial(nj - 1, nj, ring_), pow(s1_gen[j], nj));
      acc = mul(acc, t);
    }
    acc = scale(ring_.reduce(ipow(p, factors - 1)), acc);
    sigma1_basis_[b] = acc;
  }

  // derivatives into the envelope of cap r-1
  if (r >= 2) {
    PDPresentation lp = pres_;
    lp.cap = r - 1;
    lower_ = build(lp);
    partial_basis_.assign(k, std::vector<Elem>(n));
    for (size_t v = 0; v < k; ++v)
      for (size_t b = 0; b < n; ++b) {
        const auto& bm = basis_[b];
        Vec acc = lower_->zero();
        // derivative of the residual monomial
        if (bm.residual[v] > 0) {
          Monomial mu = bm.residual;
          mu[v] -= 1;
          Vec t = lower_->shift_divided(lower_->reduce_monomial(mu), bm.dp);
          for (size_t i = 0; i < acc.size(); ++i) acc[i] = ring_.add(acc[i], ring_.mul(bm.residual[v], t[i]));
        }
        // d(g_j^[n]) = g_j^[n-1] dg_j
        for (size_t j = 0; j < s; ++j) {
          const Monomial& g = pres_.generators[j];
          if (bm.dp[j] == 0 || g[v] == 0) continue;
          Monomial mu = bm.residual;
          for (size_t i = 0; i < k; ++i) mu[i] += g[i];
          mu[v] -= 1;
          std::vector<int> dp = bm.dp;
          dp[j] -= 1;
          Vec t = lower_->shift_divided(lower_->reduce_monomial(mu), dp);
          for (size_t i = 0; i < acc.size(); ++i) acc[i] = ring_.add(acc[i], ring_.mul(g[v], t[i]));
        }
        partial_basis_[v][b] = lower_->normalize(acc);
      }
  }
}

std::optional<size_t> PDAlgebra::index_of(const PDMonomial& b) const {
  auto it = index_.find(b);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool PDAlgebra::positive(size_t idx) const { return total(basis_.at(idx).dp) > 0; }

Vec PDAlgebra::reduce_monomial(const Monomial& mu) const {
  const size_t n = basis_.size();
  for (size_t j = 0; j < pres_.generators.size(); ++j) {
    if (!divides(pres_.generators[j], mu)) continue;
    std::vector<int> dj(pres_.generators.size(), 0);
    dj[j] = 1;
    return shift_divided(reduce_monomial(mono_div(mu, pres_.generators[j])), dj);
  }
  Vec v(n, 0);
  std::vector<int> zero_dp(pres_.generators.size(), 0);
  auto idx = index_of({mu, zero_dp});
  if (!idx) throw AlgebraError("PD envelope: residual monomial outside the basis");
  v[*idx] = 1;
  return v;
}

Vec PDAlgebra::shift_divided(const Vec& a, const std::vector<int>& dp) const {
  const size_t n = basis_.size();
  Vec out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    const auto& bm = basis_[i];
    std::vector<int> nd(dp.size());
    i64 c = a[i];
    for (size_t j = 0; j < dp.size(); ++j) {
      nd[j] = bm.dp[j] + dp[j];
      c = ring_.mul(c, binom_mod(nd[j], dp[j], ring_));
    }
    if (total(nd) >= pres_.cap || c == 0) continue;
    size_t idx = *index_of({bm.residual, nd});
    out[idx] = ring_.add(out[idx], c);
  }
  return out;
}

Vec PDAlgebra::multiply_basis(size_t a, size_t b) const {
  const auto& ba = basis_[a];
  const auto& bb = basis_[b];
  std::vector<int> nd(ba.dp.size());
  i64 c = 1;
  for (size_t j = 0; j < nd.size(); ++j) {
    nd[j] = ba.dp[j] + bb.dp[j];
    c = ring_.mul(c, binom_mod(nd[j], ba.dp[j], ring_));
  }
  if (total(nd) >= pres_.cap || c == 0) return Vec(basis_.size(), 0);
  Vec v = shift_divided(reduce_monomial(mono_mul(ba.residual, bb.residual)), nd);
  for (auto& x : v) x = ring_.mul(x, c);
  return v;
}

Vec PDAlgebra::raw_mul(const Vec& a, const Vec& b) const {
  const size_t n = basis_.size();
  Vec out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < n; ++j) {
      if (b[j] == 0) continue;
      const i64 c = ring_.mul(a[i], b[j]);
      for (const auto& [t, v] : mul_table_[i * n + j]) out[t] = ring_.add(out[t], ring_.mul(c, v));
    }
  }
  return out;
}

Elem PDAlgebra::normalize(const Vec& coords) const { return rel_->reduce(coords); }

Elem PDAlgebra::one() const { return basis_element(0, 1); }

Elem PDAlgebra::from_int(i64 n) const { return basis_element(0, n); }

Elem PDAlgebra::basis_element(size_t idx, i64 c) const {
  Vec v(basis_.size(), 0);
  v.at(idx) = ring_.reduce(c);
  return normalize(v);
}

Elem PDAlgebra::scale(i64 c, const Elem& a) const {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = ring_.mul(c, a[i]);
  return normalize(v);
}

Elem PDAlgebra::add(const Elem& a, const Elem& b) const {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = ring_.add(a[i], b[i]);
  return normalize(v);
}

Elem PDAlgebra::neg(const Elem& a) const {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = ring_.neg(a[i]);
  return normalize(v);
}

Elem PDAlgebra::mul(const Elem& a, const Elem& b) const { return normalize(raw_mul(a, b)); }

bool PDAlgebra::is_unit(const Elem& a) const { return ring_.is_unit(a[0]); }

Elem PDAlgebra::inverse(const Elem& a) const {
  if (!is_unit(a)) throw AlgebraError("PD inverse of a non-unit");
  const i64 cinv = ring_.inverse(a[0]);
  Elem u = scale(cinv, a);
  Elem nil = sub(one(), u);
  Elem r = one(), term = one();
  for (size_t it = 0; it < 4 * basis_.size() * static_cast<size_t>(pres_.m) + 16; ++it) {
    term = mul(term, nil);
    if (is_zero(term)) return scale(cinv, r);
    r = add(r, term);
  }
  throw AlgebraError("PD inverse: Neumann series did not terminate");
}

std::optional<i64> PDAlgebra::cardinality() const {
  int logp = static_cast<int>(basis_.size()) * pres_.m - rel_->log_p_size();
  if (logp * std::log2(static_cast<double>(pres_.p)) > 50) return std::nullopt;
  return ipow(pres_.p, logp);
}

Elem PDAlgebra::element(i64 idx) const {
  const size_t n = basis_.size();
  std::vector<i64> radix(n, ring_.modulus());
  for (size_t k = 0; k < rel_->rows().size(); ++k) radix[rel_->pivots()[k]] = rel_->rows()[k][rel_->pivots()[k]];
  Vec v(n, 0);
  for (size_t i = 0; i < n; ++i) {
    v[i] = idx % radix[i];
    idx /= radix[i];
  }
  return v;
}

i64 PDAlgebra::index_of(const Elem& a) const {
  const size_t n = basis_.size();
  std::vector<i64> radix(n, ring_.modulus());
  for (size_t k = 0; k < rel_->rows().size(); ++k) radix[rel_->pivots()[k]] = rel_->rows()[k][rel_->pivots()[k]];
  i64 idx = 0;
  for (size_t i = n; i-- > 0;) idx = idx * radix[i] + a[i];
  return idx;
}

Elem PDAlgebra::mod_p(const Elem& a) const { return rel_mod_p_->reduce(a); }

std::string PDAlgebra::to_string(const Elem& a) const {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    if (!first) os << " + ";
    first = false;
    const auto& bm = basis_[i];
    bool unit_mono = total(bm.dp) == 0 && std::all_of(bm.residual.begin(), bm.residual.end(), [](int e) { return e == 0; });
    if (a[i] != 1 || unit_mono) os << a[i];
    bool star = a[i] != 1;
    if (!std::all_of(bm.residual.begin(), bm.residual.end(), [](int e) { return e == 0; })) {
      if (star) os << "*";
      os << mono_string(bm.residual, pres_.vars);
      star = true;
    }
    for (size_t j = 0; j < bm.dp.size(); ++j) {
      if (bm.dp[j] == 0) continue;
      if (star) os << "*";
      os << gen_names_[j] << "^[" << bm.dp[j] << "]";
      star = true;
    }
  }
  if (first) os << "0";
  return os.str();
}

std::string PDAlgebra::describe() const {
  std::ostringstream os;
  os << "D(Z/" << ring_.modulus() << "[";
  for (size_t i = 0; i < pres_.vars.size(); ++i) os << (i ? "," : "") << pres_.vars[i];
  os << "]; p";
  for (const auto& g : gen_names_) os << "," << g;
  os << "; r=" << pres_.cap << ")";
  return os.str();
}

Elem PDAlgebra::generator_power(size_t j, int n) const {
  std::vector<int> dp(pres_.generators.size(), 0);
  dp.at(j) = n;
  if (n >= pres_.cap) return zero();
  return basis_element(*index_of({residuals_[0], dp}));
}

Elem PDAlgebra::variable(size_t i) const {
  Monomial mu(pres_.vars.size(), 0);
  mu.at(i) = 1;
  return monomial(mu);
}

Elem PDAlgebra::monomial(const Monomial& mu) const { return normalize(reduce_monomial(mu)); }

Elem PDAlgebra::polynomial(const PolyTerms& f) const {
  Vec acc(basis_.size(), 0);
  for (const auto& [mu, c] : f) {
    Vec t = reduce_monomial(mu);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = ring_.add(acc[i], ring_.mul(ring_.reduce(c), t[i]));
  }
  return normalize(acc);
}

Vec PDAlgebra::gen_sigma_power(size_t j, int n) const {
  // sigma(g)^[n] = sum_k ((pk)!/k!) g^[pk] * gamma_{n-k}(p) h^{n-k}
  const i64 p = pres_.p;
  const size_t s = pres_.generators.size();
  PolyTerms hterms;
  const PolyLayout& lay = h_[j].layout();
  for (const auto& [key, c] : h_[j].sorted_terms()) {
    Monomial mu(pres_.vars.size());
    for (size_t v = 0; v < mu.size(); ++v) mu[v] = lay.exponent(key, static_cast<int>(v));
    BigInt cr = c % ring_.modulus();
    hterms.emplace_back(mu, static_cast<i64>(cr));
  }
  Elem h = polynomial(hterms);
  Elem acc = zero();
  for (int kk = 0; kk <= n; ++kk) {
    if (p * kk >= pres_.cap) break;
    std::vector<int> dp(s, 0);
    dp[j] = static_cast<int>(p * kk);
    Elem gpart = basis_element(*index_of({residuals_[0], dp}), pk_factorial_ratio(kk, ring_));
    const int rest = n - kk;
    Elem hpart = rest == 0 ? one() : scale(gamma_of_p(rest, ring_), pow(h, rest));
    acc = add(acc, mul(gpart, hpart));
  }
  return acc;
}

Vec PDAlgebra::sigma_of_basis(size_t idx) const {
  const auto& bm = basis_[idx];
  const size_t k = pres_.vars.size();
  // sigma(x_i) = x_i^p + p tau_i
  Elem acc = one();
  for (size_t i = 0; i < k; ++i) {
    if (bm.residual[i] == 0) continue;
    Monomial xp(k, 0);
    xp[i] = static_cast<int>(pres_.p);
    Elem sx = monomial(xp);
    if (!pres_.tau.empty()) sx = add(sx, scale(pres_.p, polynomial(pres_.tau[i])));
    acc = mul(acc, pow(sx, bm.residual[i]));
  }
  for (size_t j = 0; j < bm.dp.size(); ++j)
    if (bm.dp[j] > 0) acc = mul(acc, gen_sigma_power(j, bm.dp[j]));
  return acc;
}

Elem PDAlgebra::sigma(const Elem& a) const {
  Vec acc(basis_.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t t = 0; t < acc.size(); ++t) acc[t] = ring_.add(acc[t], ring_.mul(a[i], sigma_basis_[i][t]));
  }
  return normalize(acc);
}

Elem PDAlgebra::sigma1_positive(const Vec& z) const {
  Vec acc(basis_.size(), 0);
  for (size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 0) continue;
    if (!positive(i)) throw AlgebraError("sigma_1: component outside the divided-power part");
    for (size_t t = 0; t < acc.size(); ++t) acc[t] = ring_.add(acc[t], ring_.mul(z[i], sigma1_basis_[i][t]));
  }
  return normalize(acc);
}

Elem PDAlgebra::sigma1(const Elem& y, const Vec& z) const { return add(sigma(y), sigma1_positive(z)); }

std::optional<std::pair<Elem, Vec>> PDAlgebra::ideal_witness(const Elem& a) const {
  const i64 p = pres_.p;
  Vec y(basis_.size(), 0), z(basis_.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (positive(i)) {
      z[i] = a[i];
    } else {
      if (a[i] % p != 0) return std::nullopt;
      y[i] = a[i] / p;
    }
  }
  return std::make_pair(normalize(y), z);
}

std::optional<std::string> PDAlgebra::well_definedness_defect() const {
  for (const auto& row : rel_->rows()) {
    Vec sr(basis_.size(), 0);
    for (size_t i = 0; i < row.size(); ++i)
      for (size_t t = 0; t < sr.size(); ++t) sr[t] = ring_.add(sr[t], ring_.mul(row[i], sigma_basis_[i][t]));
    if (!rel_->contains(sr)) return "sigma does not preserve the relation " + to_string(row);
    bool pos = true;
    for (size_t i = 0; i < row.size(); ++i)
      if (row[i] != 0 && !positive(i)) pos = false;
    if (!pos) return "relation with a degree-zero component: " + to_string(row);
    Vec s1(basis_.size(), 0);
    for (size_t i = 0; i < row.size(); ++i)
      for (size_t t = 0; t < s1.size(); ++t) s1[t] = ring_.add(s1[t], ring_.mul(row[i], sigma1_basis_[i][t]));
    if (!rel_mod_pm1_->contains(s1)) return "sigma_1 does not annihilate the relation " + to_string(row);
  }
  return std::nullopt;
}

PDAlgebra::TorsionReport PDAlgebra::torsion_probe() const {
  const size_t n = basis_.size();
  TorsionReport rep;
  Mat times_p(n, Vec(n, 0));
  for (size_t i = 0; i < n; ++i) times_p[i][i] = pres_.p % ring_.modulus();
  Mat ker = left_kernel_mod(ring_, times_p, n, rel_->rows());
  for (const auto& x : ker) {
    Vec red = rel_mod_pm1_->reduce(x);
    if (is_zero(red)) continue;
    rep.witnesses.push_back(normalize(red));
  }
  std::vector<bool> pivot(n, false);
  for (size_t c : rel_->pivots()) pivot[c] = true;
  rep.free_rank_lower = static_cast<int>(std::count(pivot.begin(), pivot.end(), false));
  std::ostringstream os;
  os << "truncation-level (r=" << pres_.cap << ", m=" << pres_.m << ")";
  rep.level = os.str();
  return rep;
}

const PDAlgebra& PDAlgebra::lower() const {
  if (!lower_) throw AlgebraError("PD envelope: cap 1 has no differentials");
  return *lower_;
}

Elem PDAlgebra::project_lower(const Elem& a) const {
  const PDAlgebra& lo = lower();
  Vec v = lo.zero();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    auto idx = lo.index_of(basis_[i]);
    if (idx) v[*idx] = ring_.add(v[*idx], a[i]);
  }
  return lo.normalize(v);
}

Elem PDAlgebra::partial(const Elem& a, size_t var) const {
  const PDAlgebra& lo = lower();
  Vec acc = lo.zero();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    const Elem& d = partial_basis_.at(var)[i];
    for (size_t t = 0; t < acc.size(); ++t) acc[t] = ring_.add(acc[t], ring_.mul(a[i], d[t]));
  }
  return lo.normalize(acc);
}

std::vector<Elem> PDAlgebra::dsigma1_dx(size_t var) const {
  const PDAlgebra& lo = lower();
  const size_t k = pres_.vars.size();
  std::vector<Elem> out(k, lo.zero());
  Monomial mu(k, 0);
  mu[var] = static_cast<int>(pres_.p - 1);
  out[var] = lo.monomial(mu);
  if (!pres_.tau.empty()) {
    Elem t = polynomial(pres_.tau[var]);
    for (size_t j = 0; j < k; ++j) out[j] = lo.add(out[j], partial(t, j));
  }
  return out;
}

}  // namespace crystaframe
