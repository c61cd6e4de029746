#include "crystaframe/monomial_algebra.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace crystaframe {

// ---------------------------------------------------------------- CoeffField

CoeffField CoeffField::residue(i64 p, int m) {
  CoeffField f;
  f.p_ = p;
  f.m_ = m;
  f.k_ = 1;
  f.prime_ = std::make_shared<CoefficientRing>(p, m);
  f.size_ = f.prime_->modulus();
  f.modulus_ = {0, 1};
  return f;
}

CoeffField CoeffField::extension(i64 p, std::vector<i64> modulus) {
  if (modulus.size() < 2) throw AlgebraError("extension: modulus must have degree >= 1");
  CoeffField f;
  f.p_ = p;
  f.m_ = 1;
  f.k_ = static_cast<int>(modulus.size()) - 1;
  f.prime_ = std::make_shared<CoefficientRing>(p, 1);
  for (auto& c : modulus) c = f.prime_->reduce(c);
  if (modulus.back() != 1) throw AlgebraError("extension: modulus must be monic");
  f.modulus_ = modulus;
  f.size_ = ipow(p, f.k_);
  if (f.k_ == 1) return f;
  if (f.size_ > 256) throw AlgebraError("extension: field too large (max 256 elements)");
  const i64 q = f.size_;
  // polynomial product mod modulus
  auto polymul = [&](i64 a, i64 b) {
    std::vector<i64> da = f.digits(a), db = f.digits(b);
    std::vector<i64> prod(2 * f.k_ - 1, 0);
    for (int i = 0; i < f.k_; ++i)
      for (int j = 0; j < f.k_; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
    for (int d = 2 * f.k_ - 2; d >= f.k_; --d) {
      i64 c = prod[d];
      if (c == 0) continue;
      for (int j = 0; j <= f.k_; ++j) prod[d - f.k_ + j] = ((prod[d - f.k_ + j] - c * f.modulus_[j]) % p + p) % p;
    }
    prod.resize(f.k_);
    return f.from_digits(prod);
  };
  f.mul_table_.assign(static_cast<size_t>(q * q), 0);
  for (i64 a = 0; a < q; ++a)
    for (i64 b = 0; b < q; ++b) f.mul_table_[static_cast<size_t>(a * q + b)] = polymul(a, b);
  // irreducibility: every nonzero element must be invertible
  for (i64 a = 1; a < q; ++a) {
    bool inv = false;
    for (i64 b = 1; b < q && !inv; ++b) inv = f.mul_table_[static_cast<size_t>(a * q + b)] == 1;
    if (!inv) throw AlgebraError("extension: modulus is not irreducible");
  }
  return f;
}

std::vector<i64> CoeffField::digits(i64 a) const {
  std::vector<i64> d(static_cast<size_t>(k_), 0);
  if (k_ == 1) {
    d[0] = a;
    return d;
  }
  for (int i = 0; i < k_; ++i) {
    d[static_cast<size_t>(i)] = a % p_;
    a /= p_;
  }
  return d;
}

i64 CoeffField::from_digits(const std::vector<i64>& d) const {
  if (k_ == 1) return prime_->reduce(d.at(0));
  i64 r = 0;
  for (int i = k_ - 1; i >= 0; --i) r = r * p_ + prime_->reduce(d[static_cast<size_t>(i)]);
  return r;
}

i64 CoeffField::from_int(i64 n) const { return prime_->reduce(n); }

i64 CoeffField::add(i64 a, i64 b) const {
  if (k_ == 1) return prime_->add(a, b);
  i64 r = 0, s = 1;
  for (int i = 0; i < k_; ++i) {
    r += ((a % p_ + b % p_) % p_) * s;
    a /= p_;
    b /= p_;
    s *= p_;
  }
  return r;
}

i64 CoeffField::neg(i64 a) const {
  if (k_ == 1) return prime_->neg(a);
  i64 r = 0, s = 1;
  for (int i = 0; i < k_; ++i) {
    r += ((p_ - a % p_) % p_) * s;
    a /= p_;
    s *= p_;
  }
  return r;
}

i64 CoeffField::mul(i64 a, i64 b) const {
  if (k_ == 1) return prime_->mul(a, b);
  return mul_table_[static_cast<size_t>(a * size_ + b)];
}

i64 CoeffField::pow(i64 a, i64 e) const {
  i64 r = one(), b = a;
  while (e > 0) {
    if (e & 1) r = mul(r, b);
    b = mul(b, b);
    e >>= 1;
  }
  return r;
}

bool CoeffField::is_unit(i64 a) const {
  if (k_ == 1) return prime_->is_unit(a);
  return a != 0;
}

i64 CoeffField::inverse(i64 a) const {
  if (k_ == 1) return prime_->inverse(a);
  if (a == 0) throw AlgebraError("inverse of zero in finite field");
  return pow(a, size_ - 2);
}

i64 CoeffField::frobenius(i64 a) const {
  if (m_ != 1) throw AlgebraError("frobenius: coefficients Z/p^m with m > 1 are not of characteristic p");
  if (k_ == 1) return a;
  return pow(a, p_);
}

// ----------------------------------------------------------- MonomialAlgebra

AlgebraPtr MonomialAlgebra::create(CoeffField field, std::vector<VariableSpec> vars,
                                   std::optional<std::pair<int, int>> total_cap) {
  std::shared_ptr<MonomialAlgebra> a(new MonomialAlgebra());
  a->field_ = std::move(field);
  a->vars_ = std::move(vars);
  a->total_cap_ = total_cap;
  a->build();
  return a;
}

bool MonomialAlgebra::admissible(const Monomial& mono) const {
  if (mono.size() != vars_.size()) return false;
  for (size_t i = 0; i < vars_.size(); ++i) {
    if (mono[i] < 0) return false;
    if (vars_[i].cap && mono[i] >= *vars_[i].cap) return false;
  }
  if (total_cap_) {
    // sum_i e_i / p^{d_i} < num / p^{den_depth}, compared over a common denominator
    int dmax = total_cap_->second;
    for (const auto& v : vars_) dmax = std::max(dmax, v.depth);
    i128 lhs = 0;
    for (size_t i = 0; i < vars_.size(); ++i)
      lhs += static_cast<i128>(mono[i]) * ipow(field_.p(), dmax - vars_[i].depth);
    i128 rhs = static_cast<i128>(total_cap_->first) * ipow(field_.p(), dmax - total_cap_->second);
    if (lhs >= rhs) return false;
  }
  return true;
}

void MonomialAlgebra::build() {
  const i64 p = field_.p();
  for (const auto& v : vars_) {
    if (v.depth < 0 || v.depth > kMaxDepth)
      throw AlgebraError("perfection depth of " + v.name + " outside [0, " + std::to_string(kMaxDepth) + "]");
    if (v.cap && *v.cap <= 0) throw AlgebraError("cap of " + v.name + " must be positive");
    if (!v.cap && !total_cap_) throw AlgebraError("variable " + v.name + " is uncapped: infinite rank");
  }
  for (size_t i = 0; i < vars_.size(); ++i)
    for (size_t j = i + 1; j < vars_.size(); ++j)
      if (vars_[i].name == vars_[j].name) throw AlgebraError("duplicate variable " + vars_[i].name);
  // per-variable bound on numerators
  std::vector<int> bound(vars_.size());
  for (size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].cap) {
      bound[i] = *vars_[i].cap;
    } else {
      // total cap num/p^D gives e_i/p^{d_i} < num/p^D
      i128 b = static_cast<i128>(total_cap_->first) * ipow(p, vars_[i].depth);
      i64 den = ipow(p, total_cap_->second);
      b = (b + den - 1) / den;
      if (b > 1 << 20) throw AlgebraError("total cap too large");
      bound[i] = static_cast<int>(b);
    }
  }
  // lexicographic enumeration (canonical order)
  Monomial cur(vars_.size(), 0);
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == vars_.size()) {
      if (admissible(cur)) {
        if (basis_.size() >= kMaxRank) throw BudgetExceeded("monomial algebra rank exceeds " + std::to_string(kMaxRank));
        basis_.push_back(cur);
      }
      return;
    }
    for (int e = 0; e < bound[i]; ++e) {
      cur[i] = e;
      rec(i + 1);
    }
    cur[i] = 0;
  };
  rec(0);
  for (size_t k = 0; k < basis_.size(); ++k) index_[basis_[k]] = k;
  const size_t n = basis_.size();
  mul_table_.assign(n * n, -1);
  Monomial prod(vars_.size());
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a; b < n; ++b) {
      for (size_t i = 0; i < vars_.size(); ++i) prod[i] = basis_[a][i] + basis_[b][i];
      auto it = index_.find(prod);
      int r = it == index_.end() ? -1 : static_cast<int>(it->second);
      mul_table_[a * n + b] = r;
      mul_table_[b * n + a] = r;
    }
  frob_table_.assign(n, -1);
  for (size_t a = 0; a < n; ++a) {
    for (size_t i = 0; i < vars_.size(); ++i) prod[i] = basis_[a][i] * static_cast<int>(p);
    auto it = index_.find(prod);
    if (it != index_.end()) frob_table_[a] = static_cast<int>(it->second);
  }
}

std::optional<size_t> MonomialAlgebra::index_of(const Monomial& mono) const {
  auto it = index_.find(mono);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t MonomialAlgebra::variable_index(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  throw AlgebraError("unknown variable " + name);
}

Vec MonomialAlgebra::one() const { return constant(1); }

Vec MonomialAlgebra::constant(i64 c) const {
  Vec v = zero();
  if (!v.empty()) v[0] = field_.from_int(c);
  return v;
}

Vec MonomialAlgebra::monomial(const Monomial& mono, i64 c) const {
  Vec v = zero();
  auto idx = index_of(mono);
  if (idx) v[*idx] = field_.from_int(c);
  return v;
}

Vec MonomialAlgebra::variable(size_t i, int num) const {
  Monomial mono(vars_.size(), 0);
  mono.at(i) = num < 0 ? static_cast<int>(ipow(field_.p(), vars_[i].depth)) : num;
  return monomial(mono);
}

Vec MonomialAlgebra::add(const Vec& a, const Vec& b) const {
  Vec r(rank());
  for (size_t i = 0; i < r.size(); ++i) r[i] = field_.add(a[i], b[i]);
  return r;
}

Vec MonomialAlgebra::sub(const Vec& a, const Vec& b) const {
  Vec r(rank());
  for (size_t i = 0; i < r.size(); ++i) r[i] = field_.sub(a[i], b[i]);
  return r;
}

Vec MonomialAlgebra::neg(const Vec& a) const {
  Vec r(rank());
  for (size_t i = 0; i < r.size(); ++i) r[i] = field_.neg(a[i]);
  return r;
}

Vec MonomialAlgebra::scale(i64 c, const Vec& a) const {
  Vec r(rank());
  for (size_t i = 0; i < r.size(); ++i) r[i] = field_.mul(c, a[i]);
  return r;
}

Vec MonomialAlgebra::mul(const Vec& a, const Vec& b) const {
  const size_t n = rank();
  Vec r(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < n; ++j) {
      if (b[j] == 0) continue;
      int k = mul_table_[i * n + j];
      if (k < 0) continue;
      r[static_cast<size_t>(k)] = field_.add(r[static_cast<size_t>(k)], field_.mul(a[i], b[j]));
    }
  }
  return r;
}

Vec MonomialAlgebra::pow(const Vec& a, i64 e) const {
  Vec r = one(), b = a;
  while (e > 0) {
    if (e & 1) r = mul(r, b);
    b = mul(b, b);
    e >>= 1;
  }
  return r;
}

bool MonomialAlgebra::all_variables_nilpotent() const {
  // every variable has a finite cap, or a total cap bounds all monomials
  if (total_cap_) return true;
  return std::all_of(vars_.begin(), vars_.end(), [](const VariableSpec& v) { return v.cap.has_value(); });
}

bool MonomialAlgebra::is_unit(const Vec& a) const {
  // all non-constant basis monomials are nilpotent (caps are finite)
  return field_.is_unit(a[0]);
}

Vec MonomialAlgebra::inverse(const Vec& a) const {
  if (!is_unit(a)) throw AlgebraError("inverse of a non-unit algebra element");
  // a = c(1 - n) with n nilpotent: a^{-1} = c^{-1} sum n^k
  i64 cinv = field_.inverse(a[0]);
  Vec u = scale(cinv, a);
  Vec n = sub(one(), u);
  Vec r = one(), term = one();
  for (size_t k = 0; k < rank() * static_cast<size_t>(field_.m()) + 1; ++k) {
    term = mul(term, n);
    if (is_zero(term)) break;
    r = add(r, term);
  }
  return scale(cinv, r);
}

Vec MonomialAlgebra::frobenius(const Vec& a) const {
  if (!field_.char_p()) throw AlgebraError("frobenius: coefficients Z/p^m with m > 1 are not of characteristic p");
  Vec r = zero();
  for (size_t i = 0; i < rank(); ++i) {
    if (a[i] == 0 || frob_table_[i] < 0) continue;
    size_t k = static_cast<size_t>(frob_table_[i]);
    r[k] = field_.add(r[k], field_.frobenius(a[i]));
  }
  return r;
}

bool MonomialAlgebra::is_perfect() const {
  if (!field_.char_p()) return false;
  // frobenius injective on basis monomials (field Frobenius is bijective)
  return std::all_of(frob_table_.begin(), frob_table_.end(), [](int k) { return k >= 0; });
}

std::vector<bool> MonomialAlgebra::ideal_mask(const std::vector<Monomial>& gens) const {
  std::vector<bool> mask(rank(), false);
  for (size_t k = 0; k < rank(); ++k)
    for (const auto& g : gens) {
      if (g.size() != vars_.size()) throw AlgebraError("ideal generator has wrong arity");
      bool div = true;
      for (size_t i = 0; i < g.size() && div; ++i) div = basis_[k][i] >= g[i];
      if (div) {
        mask[k] = true;
        break;
      }
    }
  return mask;
}

Vec MonomialAlgebra::reduce_mod_ideal(const Vec& a, const std::vector<bool>& mask) const {
  Vec r = a;
  for (size_t i = 0; i < rank(); ++i)
    if (mask[i]) r[i] = 0;
  return r;
}

std::optional<i64> MonomialAlgebra::cardinality() const {
  i128 c = 1;
  for (size_t i = 0; i < rank(); ++i) {
    c *= field_.size();
    if (c > (i128{1} << 50)) return std::nullopt;
  }
  return static_cast<i64>(c);
}

Vec MonomialAlgebra::element_from_index(i64 idx) const {
  Vec v(rank());
  for (size_t i = 0; i < rank(); ++i) {
    v[i] = idx % field_.size();
    idx /= field_.size();
  }
  return v;
}

namespace {
std::string exponent_string(int num, int depth, i64 p) {
  i64 den = ipow(p, depth);
  i64 g = std::gcd(static_cast<i64>(num), den);
  i64 n = num / g, d = den / g;
  if (d == 1) return std::to_string(n);
  return std::to_string(n) + "/" + std::to_string(d);
}
}  // namespace

std::string MonomialAlgebra::to_string(const Vec& a) const {
  std::ostringstream os;
  bool first = true;
  for (size_t k = 0; k < rank(); ++k) {
    if (a[k] == 0) continue;
    if (!first) os << " + ";
    first = false;
    bool constant_term = std::all_of(basis_[k].begin(), basis_[k].end(), [](int e) { return e == 0; });
    if (a[k] != 1 || constant_term) os << a[k];
    bool need_star = a[k] != 1;
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (basis_[k][i] == 0) continue;
      if (need_star) os << "*";
      need_star = true;
      os << vars_[i].name;
      std::string e = exponent_string(basis_[k][i], vars_[i].depth, field_.p());
      if (e != "1") os << "^" << e;
    }
  }
  if (first) os << "0";
  return os.str();
}

std::string MonomialAlgebra::describe() const {
  std::ostringstream os;
  if (field_.degree() > 1)
    os << "F_" << field_.size();
  else if (field_.m() == 1)
    os << "F_" << field_.p();
  else
    os << "Z/" << field_.size();
  if (!vars_.empty()) {
    os << "[";
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (i) os << ",";
      os << vars_[i].name;
      if (vars_[i].depth > 0) os << "^(1/" << ipow(field_.p(), vars_[i].depth) << ")";
    }
    os << "]";
  }
  os << " rank " << rank();
  return os.str();
}

// ------------------------------------------------------------- kernel of phi

namespace {
// Flatten an algebra element to F_p coordinates.
Vec flatten(const MonomialAlgebra& r, const Vec& a) {
  const int k = r.field().degree();
  Vec out;
  out.reserve(r.rank() * static_cast<size_t>(k));
  for (i64 c : a) {
    auto d = r.field().digits(c);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

Vec unflatten(const MonomialAlgebra& r, const Vec& v) {
  const size_t k = static_cast<size_t>(r.field().degree());
  Vec a(r.rank());
  for (size_t i = 0; i < r.rank(); ++i)
    a[i] = r.field().from_digits(Vec(v.begin() + static_cast<long>(i * k), v.begin() + static_cast<long>((i + 1) * k)));
  return a;
}

// F_p-basis of the algebra as elements.
std::vector<Vec> prime_basis(const MonomialAlgebra& r) {
  const int k = r.field().degree();
  std::vector<Vec> out;
  for (size_t i = 0; i < r.rank(); ++i)
    for (int j = 0; j < k; ++j) {
      Vec d(static_cast<size_t>(k), 0);
      d[static_cast<size_t>(j)] = 1;
      Vec e = r.zero();
      e[i] = r.field().from_digits(d);
      out.push_back(e);
    }
  return out;
}
}  // namespace

std::vector<Vec> frobenius_kernel_basis(const MonomialAlgebra& r) {
  if (!r.field().char_p()) throw AlgebraError("frobenius kernel: coefficients must have characteristic p");
  const CoefficientRing& fp = r.field().prime_ring();
  auto basis = prime_basis(r);
  Mat images;
  for (const auto& b : basis) images.push_back(flatten(r, r.frobenius(b)));
  Mat ker = left_kernel(fp, images, basis.size());
  std::vector<Vec> out;
  HowellForm h(fp, basis.size(), ker);
  for (const auto& row : h.rows()) {
    Vec e = r.zero();
    for (size_t i = 0; i < basis.size(); ++i)
      if (row[i] != 0) e = r.add(e, r.scale(r.field().from_int(row[i]), basis[i]));
    out.push_back(e);
  }
  return out;
}

NilpotencyReport frobenius_kernel_nilpotency(const MonomialAlgebra& r) {
  const CoefficientRing& fp = r.field().prime_ring();
  auto ker = frobenius_kernel_basis(r);
  NilpotencyReport rep;
  rep.kernel_dim = static_cast<int>(ker.size());
  if (ker.empty()) {
    rep.nilpotent = true;
    rep.index = 1;
    return rep;
  }
  const size_t ncols = r.rank() * static_cast<size_t>(r.field().degree());
  std::vector<Vec> power = ker;
  int dim_prev = -1;
  for (int idx = 1; idx <= static_cast<int>(ncols) + 1; ++idx) {
    if (power.empty()) {
      rep.nilpotent = true;
      rep.index = idx;
      return rep;
    }
    int dim = static_cast<int>(power.size());
    if (dim == dim_prev) break;  // stabilized at a nonzero ideal
    dim_prev = dim;
    Mat prods;
    for (const auto& a : power)
      for (const auto& b : ker) {
        Vec c = r.mul(a, b);
        if (!is_zero(c)) prods.push_back(flatten(r, c));
      }
    HowellForm h(fp, ncols, prods);
    power.clear();
    for (const auto& row : h.rows()) power.push_back(unflatten(r, row));
  }
  rep.nilpotent = false;
  rep.index = 0;
  return rep;
}

AlgebraPtr adjoin_p_roots(const AlgebraPtr& r, const std::vector<std::string>& targets, int depth) {
  if (depth > MonomialAlgebra::kMaxDepth)
    throw AlgebraError("adjoin_p_roots: depth " + std::to_string(depth) + " exceeds maximum " +
                       std::to_string(MonomialAlgebra::kMaxDepth));
  auto vars = r->variables();
  for (const auto& t : targets) {
    auto& v = vars.at(r->variable_index(t));
    if (depth <= v.depth) continue;
    int scale = static_cast<int>(ipow(r->field().p(), depth - v.depth));
    if (v.cap) v.cap = *v.cap * scale;
    v.depth = depth;
  }
  return MonomialAlgebra::create(r->field(), vars, r->total_cap());
}

Vec embed_into(const MonomialAlgebra& from, const MonomialAlgebra& to, const Vec& a) {
  if (from.variables().size() != to.variables().size()) throw AlgebraError("embed_into: variable mismatch");
  Vec out = to.zero();
  for (size_t k = 0; k < from.rank(); ++k) {
    if (a[k] == 0) continue;
    Monomial mono = from.basis()[k];
    for (size_t i = 0; i < mono.size(); ++i)
      mono[i] *= static_cast<int>(ipow(from.field().p(), to.variables()[i].depth - from.variables()[i].depth));
    auto idx = to.index_of(mono);
    if (!idx) throw AlgebraError("embed_into: image monomial is not admissible");
    out[*idx] = a[k];
  }
  return out;
}

}  // namespace crystaframe
