#include "crystaframe/windows.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace crystaframe {

// ------------------------------------------------------------------ matrices

EMat mat_identity(const Ring& r, size_t n) {
  EMat m = mat_zero(r, n, n);
  for (size_t i = 0; i < n; ++i) m[i][i] = r.one();
  return m;
}

EMat mat_zero(const Ring& r, size_t rows, size_t cols) {
  return EMat(rows, std::vector<Elem>(cols, r.zero()));
}

EMat mat_mul(const Ring& r, const EMat& a, const EMat& b) {
  const size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
  EMat c = mat_zero(r, n, m);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      Elem s = r.zero();
      for (size_t l = 0; l < k; ++l)
        if (!is_zero(a[i][l]) && !is_zero(b[l][j])) s = r.add(s, r.mul(a[i][l], b[l][j]));
      c[i][j] = std::move(s);
    }
  return c;
}

EMat mat_add(const Ring& r, const EMat& a, const EMat& b) {
  EMat c = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) c[i][j] = r.add(a[i][j], b[i][j]);
  return c;
}

EMat mat_sub(const Ring& r, const EMat& a, const EMat& b) {
  EMat c = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) c[i][j] = r.sub(a[i][j], b[i][j]);
  return c;
}

EMat mat_scale(const Ring& r, i64 c, const EMat& a) {
  return mat_map(a, [&](const Elem& x) { return r.times_int(c, x); });
}

EMat mat_map(const EMat& a, const std::function<Elem(const Elem&)>& f) {
  EMat c = a;
  for (auto& row : c)
    for (auto& x : row) x = f(x);
  return c;
}

bool mat_is_zero(const EMat& a) {
  for (const auto& row : a)
    for (const auto& x : row)
      if (!is_zero(x)) return false;
  return true;
}

std::optional<EMat> mat_inverse(const Ring& r, const EMat& a) {
  const size_t n = a.size();
  EMat m = a, inv = mat_identity(r, n);
  for (size_t k = 0; k < n; ++k) {
    size_t piv = n;
    for (size_t i = k; i < n; ++i)
      if (r.is_unit(m[i][k])) {
        piv = i;
        break;
      }
    if (piv == n) return std::nullopt;
    std::swap(m[k], m[piv]);
    std::swap(inv[k], inv[piv]);
    const Elem u = r.inverse(m[k][k]);
    for (size_t j = 0; j < n; ++j) {
      m[k][j] = r.mul(u, m[k][j]);
      inv[k][j] = r.mul(u, inv[k][j]);
    }
    for (size_t i = 0; i < n; ++i) {
      if (i == k || is_zero(m[i][k])) continue;
      const Elem c = m[i][k];
      for (size_t j = 0; j < n; ++j) {
        m[i][j] = r.sub(m[i][j], r.mul(c, m[k][j]));
        inv[i][j] = r.sub(inv[i][j], r.mul(c, inv[k][j]));
      }
    }
  }
  return inv;
}

EMat mat_from_ints(const Ring& r, const std::vector<std::vector<i64>>& a) {
  EMat m;
  for (const auto& row : a) {
    std::vector<Elem> out;
    for (i64 x : row) out.push_back(r.from_int(x));
    m.push_back(std::move(out));
  }
  return m;
}

std::string mat_to_string(const Ring& r, const EMat& a) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < a.size(); ++i) {
    os << (i ? ", " : "") << "[";
    for (size_t j = 0; j < a[i].size(); ++j) os << (j ? ", " : "") << r.to_string(a[i][j]);
    os << "]";
  }
  os << "]";
  return os.str();
}

// ------------------------------------------------------------------ windows

Window window_from_psi(FramePtr frame, int d, int t, EMat psi) {
  if (d < 0 || t < 0) throw AlgebraError("window_from_psi: negative rank");
  const size_t r = static_cast<size_t>(d + t);
  if (psi.size() != r) throw AlgebraError("window_from_psi: Psi must be " + std::to_string(r) + "x" + std::to_string(r));
  for (const auto& row : psi)
    if (row.size() != r) throw AlgebraError("window_from_psi: Psi is not square");
  if (!mat_inverse(frame->target(), psi)) throw AlgebraError("window_from_psi: Psi is not invertible");
  return Window{std::move(frame), d, t, std::move(psi)};
}

EMat phi_matrix(const Window& w) {
  const Ring& T = w.frame->target();
  EMat m = w.psi;
  for (auto& row : m)
    for (int j = 0; j < w.d; ++j) row[static_cast<size_t>(j)] = T.times_int(w.frame->p(), row[static_cast<size_t>(j)]);
  return m;
}

std::vector<Elem> phi(const Window& w, const std::vector<Elem>& x) {
  const Ring& T = w.frame->target();
  EMat f = phi_matrix(w);
  std::vector<Elem> out(f.size(), T.zero());
  for (size_t j = 0; j < x.size(); ++j) {
    Elem sx = w.frame->sigma(x[j]);
    for (size_t i = 0; i < f.size(); ++i) out[i] = T.add(out[i], T.mul(f[i][j], sx));
  }
  return out;
}

std::vector<Elem> m1_coordinates(const Window& w, const M1Element& x) {
  std::vector<Elem> out = x.l;
  for (const auto& tw : x.t_witness) out.push_back(w.frame->iota(tw));
  return out;
}

std::vector<Elem> phi1(const Window& w, const M1Element& x) {
  const Ring& T = w.frame->target();
  const size_t r = static_cast<size_t>(w.rank());
  std::vector<Elem> out(r, T.zero());
  for (size_t j = 0; j < r; ++j) {
    Elem s = j < static_cast<size_t>(w.d) ? w.frame->sigma(x.l[j]) : w.frame->sigma1(x.t_witness[j - static_cast<size_t>(w.d)]);
    for (size_t i = 0; i < r; ++i) out[i] = T.add(out[i], T.mul(w.psi[i][j], s));
  }
  return out;
}

namespace {
std::mt19937_64& sample_rng(unsigned long long seed) {
  thread_local std::mt19937_64 rng;
  rng.seed(seed);
  return rng;
}

Elem random_carrier(const Ring& r, std::mt19937_64& rng) {
  if (auto c = r.cardinality()) return r.element(static_cast<i64>(rng() % static_cast<unsigned long long>(*c)));
  Vec v(r.width());
  for (auto& x : v) x = static_cast<i64>(rng() % static_cast<unsigned long long>(r.scalars()->modulus()));
  return r.normalize(v);
}

Elem random_witness(const Frame& f, std::mt19937_64& rng) {
  if (auto c = f.witness_count()) return f.witness_element(static_cast<i64>(rng() % static_cast<unsigned long long>(*c)));
  Vec v(f.witness_width());
  for (auto& x : v) x = static_cast<i64>(rng() % static_cast<unsigned long long>(f.carrier().scalars()->modulus()));
  return f.normalize_witness(v);
}
}  // namespace

Certificate validate_window(const Window& w, int samples, unsigned long long seed) {
  Certificate c;
  const Frame& f = *w.frame;
  const Ring& A = f.carrier();
  const Ring& T = f.target();
  const size_t r = static_cast<size_t>(w.rank());
  ++c.checks;
  if (!mat_inverse(T, w.psi)) c.fail("Psi is not invertible");
  auto& rng = sample_rng(seed);
  for (int s = 0; s < samples; ++s) {
    M1Element x;
    for (int j = 0; j < w.d; ++j) x.l.push_back(random_carrier(A, rng));
    for (int j = 0; j < w.t; ++j) x.t_witness.push_back(random_witness(f, rng));
    ++c.checks;
    std::vector<Elem> lhs = phi1(w, x), rhs = phi(w, m1_coordinates(w, x));
    for (auto& e : lhs) e = T.times_int(f.p(), e);
    if (lhs != rhs) c.fail("p*Phi_1 != Phi on M_1");

    Elem wa = random_witness(f, rng);
    Elem a = f.iota(wa);
    std::vector<Elem> y;
    for (size_t j = 0; j < r; ++j) y.push_back(random_carrier(A, rng));
    M1Element ay;
    for (size_t j = 0; j < r; ++j) {
      if (j < static_cast<size_t>(w.d))
        ay.l.push_back(A.mul(a, y[j]));
      else
        ay.t_witness.push_back(f.witness_scale(wa, y[j]));
    }
    ++c.checks;
    std::vector<Elem> l2 = phi1(w, ay), r2 = phi(w, y);
    Elem s1 = f.sigma1(wa);
    for (auto& e : r2) e = T.mul(s1, e);
    if (l2 != r2) c.fail("Phi_1(a x) != sigma_1(a) Phi(x) for a = " + A.to_string(a));
  }
  return c;
}

FVOperators fv_operators(const Window& w) {
  const Ring& T = w.frame->target();
  FVOperators out;
  out.f = phi_matrix(w);
  auto inv = mat_inverse(T, w.psi);
  if (!inv) throw AlgebraError("fv_operators: Psi is not invertible");
  out.v = *inv;
  for (size_t i = static_cast<size_t>(w.d); i < out.v.size(); ++i)
    for (auto& x : out.v[i]) x = T.times_int(w.frame->p(), x);
  const EMat pid = mat_scale(T, w.frame->p(), mat_identity(T, static_cast<size_t>(w.rank())));
  out.vf_ok = mat_mul(T, out.v, out.f) == pid;
  out.fv_ok = mat_mul(T, out.f, out.v) == pid;
  return out;
}

Window base_change(const FrameHom& h, const Window& w) {
  return window_from_psi(h.target, w.d, w.t, mat_map(w.psi, h.alpha_minus));
}

// ------------------------------------------------------------------ homs

EMat hom_defect(const Window& v, const Window& w, const HomMatrix& h, HomMode mode) {
  const Frame& f = *v.frame;
  const Ring& T = f.target();
  const size_t r = static_cast<size_t>(v.rank()), r2 = static_cast<size_t>(w.rank());
  const size_t d = static_cast<size_t>(v.d), d2 = static_cast<size_t>(w.d);
  EMat rg = mat_map(h.g, [&](const Elem& x) { return f.reduce(x); });
  if (mode == HomMode::PhiModule) {
    EMat sg = mat_map(h.g, [&](const Elem& x) { return f.sigma(x); });
    return mat_sub(T, mat_mul(T, rg, phi_matrix(v)), mat_mul(T, phi_matrix(w), sg));
  }
  EMat phig = mat_zero(T, r2, r);
  for (size_t i = 0; i < r2; ++i)
    for (size_t j = 0; j < r; ++j) {
      if (i >= d2 && j < d) {
        phig[i][j] = f.sigma1(h.witnesses[i - d2][j]);
        continue;
      }
      Elem s = f.sigma(h.g[i][j]);
      if (i < d2 && j >= d) s = T.times_int(f.p(), s);
      phig[i][j] = std::move(s);
    }
  return mat_sub(T, mat_mul(T, rg, v.psi), mat_mul(T, w.psi, phig));
}

bool is_hom(const Window& v, const Window& w, const HomMatrix& h, HomMode mode) {
  if (mode == HomMode::Window)
    for (size_t i = static_cast<size_t>(w.d); i < h.g.size(); ++i)
      for (size_t j = 0; j < static_cast<size_t>(v.d); ++j)
        if (v.frame->iota(h.witnesses[i - static_cast<size_t>(w.d)][j]) != h.g[i][j]) return false;
  return mat_is_zero(hom_defect(v, w, h, mode));
}

namespace {

struct Slot {
  size_t i, j;
  bool witness;
  size_t offset, width;
};

struct HomLayout {
  std::vector<Slot> slots;
  size_t unknowns = 0;
};

HomLayout hom_layout(const Window& v, const Window& w, HomMode mode) {
  const Frame& f = *v.frame;
  HomLayout lay;
  for (size_t i = 0; i < static_cast<size_t>(w.rank()); ++i)
    for (size_t j = 0; j < static_cast<size_t>(v.rank()); ++j) {
      bool wit = mode == HomMode::Window && i >= static_cast<size_t>(w.d) && j < static_cast<size_t>(v.d);
      size_t width = wit ? f.witness_width() : f.carrier().width();
      lay.slots.push_back({i, j, wit, lay.unknowns, width});
      lay.unknowns += width;
    }
  return lay;
}

HomMatrix hom_from_slots(const Window& v, const Window& w, const HomLayout& lay,
                         const std::function<Elem(const Slot&)>& value) {
  const Frame& f = *v.frame;
  HomMatrix h;
  h.g = mat_zero(f.carrier(), static_cast<size_t>(w.rank()), static_cast<size_t>(v.rank()));
  h.witnesses.assign(static_cast<size_t>(w.t), std::vector<Elem>(static_cast<size_t>(v.d)));
  for (const auto& s : lay.slots) {
    Elem x = value(s);
    if (s.witness) {
      h.g[s.i][s.j] = f.iota(x);
      h.witnesses[s.i - static_cast<size_t>(w.d)][s.j] = std::move(x);
    } else {
      h.g[s.i][s.j] = std::move(x);
    }
  }
  return h;
}

Vec flatten(const EMat& m) {
  Vec out;
  for (const auto& row : m)
    for (const auto& x : row) out.insert(out.end(), x.begin(), x.end());
  return out;
}

Mat block_relations(const Ring& r, size_t blocks) {
  Mat rel;
  const auto rows = r.relation_rows();
  for (size_t b = 0; b < blocks; ++b)
    for (const auto& row : rows) {
      Vec v(blocks * r.width(), 0);
      std::copy(row.begin(), row.end(), v.begin() + static_cast<long>(b * r.width()));
      rel.push_back(std::move(v));
    }
  return rel;
}

HomSpace hom_space_linear(const Window& v, const Window& w, HomMode mode) {
  const Frame& f = *v.frame;
  const Ring& A = f.carrier();
  const Ring& T = f.target();
  const CoefficientRing& R = *A.scalars();
  HomLayout lay = hom_layout(v, w, mode);
  const size_t blocks = static_cast<size_t>(w.rank() * v.rank());
  auto build = [&](const Vec& u) {
    return hom_from_slots(v, w, lay, [&](const Slot& s) {
      Vec x(u.begin() + static_cast<long>(s.offset), u.begin() + static_cast<long>(s.offset + s.width));
      return s.witness ? f.normalize_witness(x) : A.normalize(x);
    });
  };
  Mat rows;
  for (size_t k = 0; k < lay.unknowns; ++k) {
    Vec u(lay.unknowns, 0);
    u[k] = 1;
    rows.push_back(flatten(hom_defect(v, w, build(u), mode)));
  }
  const size_t ncols = blocks * T.width();
  Mat kernel = left_kernel_mod(R, rows, ncols, block_relations(T, blocks));
  HomSpace out;
  Mat grows;
  for (const auto& kv : kernel) {
    HomMatrix h = build(kv);
    if (mat_is_zero(h.g)) continue;
    grows.push_back(flatten(h.g));
    out.generators.push_back(std::move(h));
  }
  Mat rel = block_relations(A, blocks);
  HowellForm base(R, blocks * A.width(), rel);
  rel.insert(rel.end(), grows.begin(), grows.end());
  HowellForm all(R, blocks * A.width(), rel);
  out.log_p_size = all.log_p_size() - base.log_p_size();
  return out;
}

HomSpace hom_space_brute(const Window& v, const Window& w, HomMode mode, i64 budget) {
  const Frame& f = *v.frame;
  const Ring& A = f.carrier();
  HomLayout lay = hom_layout(v, w, mode);
  auto ca = A.cardinality();
  auto cw = f.witness_count();
  if (!ca || (mode == HomMode::Window && !cw)) throw BudgetExceeded("hom_space: carrier is not enumerable");
  std::vector<i64> radix;
  i64 total = 1;
  for (const auto& s : lay.slots) {
    radix.push_back(s.witness ? *cw : *ca);
    if (total > budget / radix.back()) throw BudgetExceeded("hom_space: enumeration exceeds budget");
    total *= radix.back();
  }
  HomSpace out;
  out.exhaustive = true;
  std::set<Vec> seen;
  for (i64 idx = 0; idx < total; ++idx) {
    i64 rest = idx;
    std::vector<i64> digit;
    for (i64 rd : radix) {
      digit.push_back(rest % rd);
      rest /= rd;
    }
    size_t k = 0;
    HomMatrix h = hom_from_slots(v, w, lay, [&](const Slot& s) {
      i64 dg = digit[k++];
      return s.witness ? f.witness_element(dg) : A.element(dg);
    });
    if (!is_hom(v, w, h, mode)) continue;
    if (seen.insert(flatten(h.g)).second) out.generators.push_back(std::move(h));
  }
  double lg = std::log(static_cast<double>(seen.size())) / std::log(static_cast<double>(f.p()));
  out.log_p_size = static_cast<int>(std::lround(lg));
  return out;
}

}  // namespace

HomSpace hom_space(const Window& v, const Window& w, HomMode mode, i64 budget) {
  if (v.frame != w.frame) throw AlgebraError("hom_space: windows over different frames");
  if (v.frame->linear()) return hom_space_linear(v, w, mode);
  return hom_space_brute(v, w, mode, budget);
}

bool hom_group_contains(const Window& v, const Window& w, const HomSpace& s, const EMat& g) {
  const Ring& A = v.frame->carrier();
  if (s.exhaustive) {
    for (const auto& h : s.generators)
      if (h.g == g) return true;
    return is_zero(flatten(g));
  }
  const size_t blocks = static_cast<size_t>(w.rank() * v.rank());
  Mat rows = block_relations(A, blocks);
  for (const auto& h : s.generators) rows.push_back(flatten(h.g));
  HowellForm hf(*A.scalars(), blocks * A.width(), rows);
  return hf.contains(flatten(g));
}

FNilpotence f_nilpotence(const Window& w, int bound) {
  const Frame& f = *w.frame;
  const Ring& T = f.target();
  FNilpotence out;
  if (bound <= 0) bound = (w.rank() + 1) * static_cast<int>(T.width() + 1) * 2;
  out.bound = bound;
  const EMat phi0 = phi_matrix(w);
  EMat m = phi0;
  for (int k = 1; k <= bound; ++k) {
    bool zero = true;
    for (const auto& row : m)
      for (const auto& x : row)
        if (!f.target_divisible_by_p(x)) zero = false;
    if (zero) {
      out.nilpotent = true;
      out.index = k;
      return out;
    }
    m = mat_mul(T, phi0, mat_map(m, [&](const Elem& x) { return f.sigma_target(x); }));
  }
  return out;
}

// ------------------------------------------------------------------ normal decomposition

std::pair<i64, int> lift_idempotent(const CoefficientRing& ring, i64 seed) {
  i64 e = ring.reduce(seed);
  if ((ring.mul(e, e) - e) % ring.p() != 0) throw AlgebraError("lift_idempotent: seed is not idempotent mod p");
  int it = 0;
  while (ring.mul(e, e) != e) {
    i64 e2 = ring.mul(e, e);
    e = ring.sub(ring.mul(3, e2), ring.mul(2, ring.mul(e2, e)));
    if (++it > 64) throw AlgebraError("lift_idempotent: no convergence");
  }
  return {e, it};
}

NormalDecomposition normal_decomposition(const Frame& f, int r, const std::vector<std::vector<i64>>& m1_gens) {
  const auto* res = dynamic_cast<const ResidueRing*>(&f.carrier());
  if (!res) throw AlgebraError("normal_decomposition: carrier must be Z/p^m");
  const CoefficientRing& R = res->coefficients();
  const i64 p = R.p();
  const size_t n = static_cast<size_t>(r);
  Mat gens;
  for (const auto& g : m1_gens) {
    if (g.size() != n) throw AlgebraError("normal_decomposition: generator of wrong length");
    Vec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = R.reduce(g[i]);
    gens.push_back(v);
  }
  HowellForm m1(R, n, gens);
  for (size_t i = 0; i < n; ++i) {
    Vec pe(n, 0);
    pe[i] = R.reduce(p);
    if (!m1.contains(pe)) throw AlgebraError("normal_decomposition: I*M is not contained in M_1");
  }
  // image of M_1 in F_p^r, row reduced
  CoefficientRing Fp(p, 1);
  Mat ubar;
  std::vector<size_t> pivots;
  for (const auto& g : gens) {
    Vec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = g[i] % p;
    for (size_t k = 0; k < ubar.size(); ++k) {
      i64 c = v[pivots[k]];
      if (c == 0) continue;
      for (size_t i = 0; i < n; ++i) v[i] = Fp.sub(v[i], Fp.mul(c, ubar[k][i]));
    }
    size_t piv = n;
    for (size_t i = 0; i < n; ++i)
      if (v[i] != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    i64 inv = Fp.inverse(v[piv]);
    for (auto& x : v) x = Fp.mul(inv, x);
    for (size_t k = 0; k < ubar.size(); ++k) {
      i64 c = ubar[k][piv];
      if (c == 0) continue;
      for (size_t i = 0; i < n; ++i) ubar[k][i] = Fp.sub(ubar[k][i], Fp.mul(c, v[i]));
    }
    ubar.push_back(v);
    pivots.push_back(piv);
  }
  NormalDecomposition out;
  out.d = static_cast<int>(ubar.size());
  out.t = r - out.d;
  std::vector<Vec> cols = ubar;  // basis of F_p^r: U, then complementary unit vectors
  for (size_t i = 0; i < n; ++i)
    if (std::find(pivots.begin(), pivots.end(), i) == pivots.end()) {
      Vec e(n, 0);
      e[i] = 1;
      cols.push_back(e);
    }
  ResidueRing fp(p, 1), zr(p, R.m());
  std::vector<std::vector<i64>> bint(n, std::vector<i64>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) bint[i][j] = cols[j][i];
  EMat bbar = mat_from_ints(fp, bint);
  auto binv = mat_inverse(fp, bbar);
  if (!binv) throw AlgebraError("normal_decomposition: internal basis error");
  EMat dmat = mat_zero(fp, n, n);
  for (size_t i = 0; i < static_cast<size_t>(out.d); ++i) dmat[i][i] = fp.one();
  EMat ebar = mat_mul(fp, mat_mul(fp, bbar, dmat), *binv);
  // lift to Z/p^m and iterate e <- 3e^2 - 2e^3
  EMat e = mat_map(ebar, [&](const Elem& x) { return zr.from_int(x[0]); });
  while (mat_mul(zr, e, e) != e) {
    EMat e2 = mat_mul(zr, e, e);
    e = mat_sub(zr, mat_scale(zr, 3, e2), mat_scale(zr, 2, mat_mul(zr, e2, e)));
    if (++out.iterations > 64) throw AlgebraError("normal_decomposition: idempotent iteration did not converge");
  }
  out.idempotent = e;
  EMat one_minus = mat_sub(zr, mat_identity(zr, n), e);
  out.basis = mat_zero(zr, n, n);
  for (size_t k = 0; k < n; ++k) {
    const EMat& proj = k < static_cast<size_t>(out.d) ? e : one_minus;
    for (size_t i = 0; i < n; ++i) {
      Elem s = zr.zero();
      for (size_t j = 0; j < n; ++j) s = zr.add(s, zr.mul(proj[i][j], zr.from_int(cols[k][j])));
      out.basis[i][k] = s;
    }
  }
  // M_1 = L + p T
  Mat lt;
  for (size_t k = 0; k < n; ++k) {
    Vec col(n);
    for (size_t i = 0; i < n; ++i) col[i] = out.basis[i][k][0];
    if (k < static_cast<size_t>(out.d)) {
      if (!m1.contains(col)) throw AlgebraError("normal_decomposition: M/M_1 is not projective");
    } else {
      for (auto& x : col) x = R.mul(p, x);
    }
    lt.push_back(col);
  }
  HowellForm lpt(R, n, lt);
  for (const auto& g : gens)
    if (!lpt.contains(g)) throw AlgebraError("normal_decomposition: M_1 != L + I T");
  return out;
}

// ------------------------------------------------------------------ deformation

Window lift_window(const FrameHom& h, const Window& tw, const std::function<Elem(const Elem&)>& section_minus) {
  Window w = window_from_psi(h.source, tw.d, tw.t, mat_map(tw.psi, section_minus));
  if (mat_map(w.psi, h.alpha_minus) != tw.psi) throw AlgebraError("lift_window: section is not a section of alpha");
  return w;
}

LiftedHom lift_hom(const FrameHom& h, const Window& v, const Window& w, const HomMatrix& target_hom,
                   const std::function<Elem(const Elem&)>& section, int max_iterations) {
  const Frame& F = *h.source;
  const Ring& A = F.carrier();
  const Ring& T = F.target();
  LiftedHom out;
  HomMatrix g;
  g.g = mat_map(target_hom.g, section);
  g.witnesses.assign(static_cast<size_t>(w.t), std::vector<Elem>(static_cast<size_t>(v.d)));
  for (size_t i = 0; i < static_cast<size_t>(w.t); ++i)
    for (size_t j = 0; j < static_cast<size_t>(v.d); ++j) {
      const Elem& a = g.g[i + static_cast<size_t>(w.d)][j];
      auto wit = F.witness(a);
      if (!wit) throw AlgebraError("lift_hom: lifted matrix does not preserve the filtration");
      g.witnesses[i][j] = *wit;
      // the witness must lift the given one, not just any witness of a
      if (h.alpha_witness && i < target_hom.witnesses.size() && F.witness_count()) {
        const Frame& G = *h.target;
        const Elem want = G.normalize_witness(target_hom.witnesses[i][j]);
        bool found = false;
        for (const auto& u : F.witness_candidates(a))
          if (G.normalize_witness(h.alpha_witness(u)) == want) {
            g.witnesses[i][j] = u;
            found = true;
            break;
          }
        if (!found) throw AlgebraError("lift_hom: no witness over the given one");
      }
    }
  auto psi_inv = mat_inverse(T, v.psi);
  if (!psi_inv) throw AlgebraError("lift_hom: source window is not invertible");
  for (;;) {
    EMat def = hom_defect(v, w, g, HomMode::Window);
    if (mat_is_zero(def)) break;
    if (out.iterations >= max_iterations) throw BudgetExceeded("lift_hom: successive approximation did not terminate");
    ++out.iterations;
    EMat corr = mat_mul(T, def, *psi_inv);
    for (size_t i = 0; i < corr.size(); ++i)
      for (size_t j = 0; j < corr[i].size(); ++j) {
        Elem eta = F.lift_target(corr[i][j]);
        if (is_zero(eta)) continue;
        g.g[i][j] = A.sub(g.g[i][j], eta);
        if (i >= static_cast<size_t>(w.d) && j < static_cast<size_t>(v.d)) {
          auto wit = F.witness(A.neg(eta));
          if (!wit) throw AlgebraError("lift_hom: correction leaves the ideal");
          auto& slot = g.witnesses[i - static_cast<size_t>(w.d)][j];
          slot = F.witness_add(slot, *wit);
        }
      }
  }
  if (!is_hom(v, w, g, HomMode::Window)) throw AlgebraError("lift_hom: lifted matrix is not a window hom");
  if (mat_map(g.g, h.alpha) != target_hom.g) throw AlgebraError("lift_hom: lift does not reduce to the given hom");
  out.hom = std::move(g);
  Window v2 = base_change(h, v), w2 = base_change(h, w);
  out.unique = hom_space(v, w, HomMode::Window).log_p_size == hom_space(v2, w2, HomMode::Window).log_p_size;
  return out;
}

// ------------------------------------------------------------------ classification

namespace {

// Addition and multiplication tables of a small finite ring, by element index.
struct RingTable {
  i64 n = 0;
  std::vector<int> add, mul;
  std::vector<bool> unit;
  int zero = 0, one = 0, neg_one = 0;

  explicit RingTable(const Ring& r) {
    auto c = r.cardinality();
    if (!c || *c > 2048) throw BudgetExceeded("classify_windows: A^- has more than 2048 elements");
    n = *c;
    std::vector<Elem> el;
    for (i64 i = 0; i < n; ++i) el.push_back(r.element(i));
    add.resize(static_cast<size_t>(n * n));
    mul.resize(static_cast<size_t>(n * n));
    unit.resize(static_cast<size_t>(n));
    for (i64 i = 0; i < n; ++i) {
      unit[static_cast<size_t>(i)] = r.is_unit(el[static_cast<size_t>(i)]);
      for (i64 j = 0; j < n; ++j) {
        add[static_cast<size_t>(i * n + j)] = static_cast<int>(r.index_of(r.add(el[static_cast<size_t>(i)], el[static_cast<size_t>(j)])));
        mul[static_cast<size_t>(i * n + j)] = static_cast<int>(r.index_of(r.mul(el[static_cast<size_t>(i)], el[static_cast<size_t>(j)])));
      }
    }
    zero = static_cast<int>(r.index_of(r.zero()));
    one = static_cast<int>(r.index_of(r.one()));
    neg_one = static_cast<int>(r.index_of(r.neg(r.one())));
  }
  int a(int x, int y) const { return add[static_cast<size_t>(x * n + y)]; }
  int m(int x, int y) const { return mul[static_cast<size_t>(x * n + y)]; }
};

using IMat = std::array<int, 4>;  // r x r (r <= 2), row-major element indices

IMat imul(const RingTable& t, const IMat& x, const IMat& y, size_t r) {
  IMat z{};
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) {
      int s = t.zero;
      for (size_t k = 0; k < r; ++k) s = t.a(s, t.m(x[i * r + k], y[k * r + j]));
      z[i * r + j] = s;
    }
  return z;
}

bool iinvertible(const RingTable& t, const IMat& x, size_t r) {
  if (r == 0) return true;
  if (r == 1) return t.unit[static_cast<size_t>(x[0])];
  int ad = t.m(x[0], x[3]), bc = t.m(x[1], x[2]);
  return t.unit[static_cast<size_t>(t.a(ad, t.m(t.neg_one, bc)))];
}

struct Generator {
  IMat left, right;  // Psi -> left * Psi * right
  bool operator<(const Generator& o) const { return left != o.left ? left < o.left : right < o.right; }
};

}  // namespace

ClassTable classify_windows(FramePtr frame, int r, i64 enumeration_budget) {
  if (r < 0 || r > 2) throw AlgebraError("classify_windows: rank must be 0, 1 or 2");
  const Frame& f = *frame;
  const Ring& A = f.carrier();
  const Ring& T = f.target();
  ClassTable table;
  table.frame = f.describe();
  table.rank = r;
  if (r == 0) {
    table.classes.push_back({0, 0, {}, 1});
    table.enumerated = 1;
    table.class_of_key = {{0}};
    return table;
  }
  RingTable rt(T);
  const size_t rr = static_cast<size_t>(r);
  const size_t cells = rr * rr;
  i64 keys = 1;
  for (size_t k = 0; k < cells; ++k) {
    if (keys > enumeration_budget / rt.n) throw BudgetExceeded("classify_windows: enumeration exceeds budget");
    keys *= rt.n;
  }
  auto ca = A.cardinality();
  auto cw = f.witness_count();
  if (!ca || *ca > (i64{1} << 16) || !cw || *cw > (i64{1} << 16)) throw BudgetExceeded("classify_windows: carrier too large");
  std::vector<Elem> carrier;
  for (i64 i = 0; i < *ca; ++i) carrier.push_back(A.element(i));
  // E_ij(x) E_ij(y) = E_ij(x + y): additive generators suffice off the diagonal
  const std::vector<Elem> carrier_gens = f.carrier_generators();
  const std::vector<Elem> witness_gens = f.witness_generators();

  auto idx = [&](const Elem& x) { return static_cast<int>(T.index_of(x)); };
  auto decode = [&](i64 key) {
    IMat m{};
    for (size_t k = 0; k < cells; ++k) {
      m[k] = static_cast<int>(key % rt.n);
      key /= rt.n;
    }
    return m;
  };
  auto encode = [&](const IMat& m) {
    i64 key = 0;
    for (size_t k = cells; k-- > 0;) key = key * rt.n + m[k];
    return key;
  };

  std::vector<int> cls(static_cast<size_t>(keys), -1);
  std::vector<i64> queue;
  for (int d = 0; d <= r; ++d) {
    const size_t du = static_cast<size_t>(d);
    // generators of the automorphism group of (M, M_1): (reduce(g), Phi_g^{-1})
    std::set<Generator> gens;
    auto add_gen = [&](const EMat& g, const EMat& phig) {
      auto inv = mat_inverse(T, phig);
      if (!inv) return;
      Generator gen{};
      for (size_t i = 0; i < rr; ++i)
        for (size_t j = 0; j < rr; ++j) {
          gen.left[i * rr + j] = idx(f.reduce(g[i][j]));
          gen.right[i * rr + j] = idx((*inv)[i][j]);
        }
      gens.insert(std::move(gen));
    };
    for (size_t i = 0; i < rr; ++i)
      for (const auto& u : carrier) {
        if (!A.is_unit(u)) continue;
        EMat g = mat_identity(A, rr), phig = mat_identity(T, rr);
        g[i][i] = u;
        phig[i][i] = f.sigma(u);
        add_gen(g, phig);
      }
    for (size_t i = 0; i < rr; ++i)
      for (size_t j = 0; j < rr; ++j) {
        if (i == j) continue;
        if (i >= du && j < du) {
          for (const auto& w : witness_gens) {
            EMat g = mat_identity(A, rr), phig = mat_identity(T, rr);
            g[i][j] = f.iota(w);
            phig[i][j] = f.sigma1(w);
            add_gen(g, phig);
          }
        } else {
          for (const auto& x : carrier_gens) {
            EMat g = mat_identity(A, rr), phig = mat_identity(T, rr);
            g[i][j] = x;
            Elem s = f.sigma(x);
            if (i < du && j >= du) s = T.times_int(f.p(), s);
            phig[i][j] = s;
            add_gen(g, phig);
          }
        }
      }
    std::vector<Generator> glist(gens.begin(), gens.end());
    std::fill(cls.begin(), cls.end(), -1);
    const int offset = static_cast<int>(table.classes.size());
    int next_class = offset;
    for (i64 key = 0; key < keys; ++key) {
      ++table.enumerated;
      if (cls[static_cast<size_t>(key)] >= 0) continue;
      IMat psi = decode(key);
      if (!iinvertible(rt, psi, rr)) continue;
      const int id = next_class++;
      cls[static_cast<size_t>(key)] = id;
      queue.clear();
      queue.push_back(key);
      for (size_t head = 0; head < queue.size(); ++head) {
        const IMat x = decode(queue[head]);
        for (const auto& g : glist) {
          const i64 y = encode(imul(rt, imul(rt, g.left, x, rr), g.right, rr));
          if (cls[static_cast<size_t>(y)] < 0) {
            cls[static_cast<size_t>(y)] = id;
            queue.push_back(y);
          }
        }
      }
      const auto orbit = static_cast<i64>(queue.size());
      WindowClass wc;
      wc.d = d;
      wc.t = r - d;
      wc.orbit_size = orbit;
      wc.psi = EMat(rr, std::vector<Elem>(rr));
      for (size_t i = 0; i < rr; ++i)
        for (size_t j = 0; j < rr; ++j) wc.psi[i][j] = T.element(psi[i * rr + j]);
      table.classes.push_back(std::move(wc));
    }
    table.class_of_key.push_back(cls);
  }
  return table;
}

int class_index(const ClassTable& table, const Window& w) {
  if (w.rank() != table.rank) throw AlgebraError("class_index: rank mismatch");
  if (table.rank == 0) return 0;
  const Ring& T = w.frame->target();
  const i64 n = *T.cardinality();
  i64 key = 0;
  for (size_t i = w.psi.size(); i-- > 0;)
    for (size_t j = w.psi.size(); j-- > 0;) key = key * n + T.index_of(w.psi[i][j]);
  return table.class_of_key.at(static_cast<size_t>(w.d)).at(static_cast<size_t>(key));
}

}  // namespace crystaframe

// ------------------------------------------------------------------ residue fast path

namespace crystaframe {

namespace {

constexpr int kMaxCols = 12;
constexpr int kMaxRows = 24;
using Row = std::array<i64, kMaxCols>;

// Howell form of at most kMaxRows rows of width n over Z/p^m, in place.
// Returns the number of nonzero rows; rows[0..k) are in echelon shape.
int small_howell(const CoefficientRing& R, std::array<Row, kMaxRows>& rows, int nrows, int n) {
  const i64 p = R.p();
  const int m = R.m();
  int top = 0;
  for (int c = 0; c < n && top < nrows; ++c) {
    int best = -1, bv = m;
    for (int i = top; i < nrows; ++i) {
      if (rows[i][c] == 0) continue;
      int v = R.valuation(rows[i][c]);
      if (v < bv) {
        bv = v;
        best = i;
      }
    }
    if (best < 0) continue;
    std::swap(rows[top], rows[best]);
    Row& piv = rows[top];
    i64 unit = piv[c];
    for (int k = 0; k < bv; ++k) unit /= p;
    i64 inv = R.inverse(unit);
    for (int j = c; j < n; ++j) piv[j] = R.mul(piv[j], inv);
    const i64 pv = piv[c];  // p^bv
    for (int i = 0; i < nrows; ++i) {
      if (i == top || rows[i][c] == 0) continue;
      const i64 q = rows[i][c] / pv;  // exact below the pivot, a remainder in [0, p^v) above
      for (int j = c; j < n; ++j) rows[i][j] = R.sub(rows[i][j], R.mul(q, piv[j]));
    }
    if (bv > 0 && nrows < kMaxRows) {
      // saturation: p^{m-bv} times the pivot row vanishes at column c
      Row extra{};
      i64 s = ipow(p, m - bv);
      bool nz = false;
      for (int j = c + 1; j < n; ++j) {
        extra[j] = R.mul(s, piv[j]);
        if (extra[j]) nz = true;
      }
      if (nz) rows[nrows++] = extra;
    }
    ++top;
  }
  return top;
}

void residue_defect(const CoefficientRing& R, const SmallWindow& v, const SmallWindow& w, const SmallHom& h, HomMode mode,
                    std::array<i64, 4>& out) {
  const int r = v.rank(), r2 = w.rank();
  const i64 p = R.p();
  // left: g * Psi (window) or g * Psi P (phi); right: Psi' * Phi_g or Psi' P' g
  for (int i = 0; i < r2; ++i)
    for (int l = 0; l < r; ++l) {
      i64 s = 0;
      for (int j = 0; j < r; ++j) {
        i64 a = v.psi[static_cast<size_t>(j * r + l)];
        if (mode == HomMode::PhiModule && l < v.d) a = R.mul(p, a);
        s = R.add(s, R.mul(h.g[static_cast<size_t>(i * r + j)], a));
      }
      for (int k = 0; k < r2; ++k) {
        i64 b = w.psi[static_cast<size_t>(i * r2 + k)];
        i64 e;
        if (mode == HomMode::PhiModule) {
          if (k < w.d) b = R.mul(p, b);
          e = h.g[static_cast<size_t>(k * r + l)];
        } else if (k >= w.d && l < v.d) {
          e = h.witness[static_cast<size_t>(k * r + l)];
        } else {
          e = h.g[static_cast<size_t>(k * r + l)];
          if (k < w.d && l >= v.d) e = R.mul(p, e);
        }
        s = R.sub(s, R.mul(b, e));
      }
      out[static_cast<size_t>(i * r + l)] = s;
    }
}

}  // namespace

SmallWindow small_window(const Window& w) {
  if (!dynamic_cast<const ResidueRing*>(&w.frame->carrier()) || w.frame->kind() != FrameKind::Lift)
    throw AlgebraError("small_window: frame must be a residue lift frame");
  if (w.rank() > 2) throw AlgebraError("small_window: rank must be <= 2");
  SmallWindow s;
  s.d = w.d;
  s.t = w.t;
  const size_t r = static_cast<size_t>(w.rank());
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j) s.psi[i * r + j] = w.psi[i][j][0];
  return s;
}

bool residue_is_hom(const CoefficientRing& R, const SmallWindow& v, const SmallWindow& w, const SmallHom& h, HomMode mode) {
  const int r = v.rank(), r2 = w.rank();
  if (mode == HomMode::Window)
    for (int i = w.d; i < r2; ++i)
      for (int j = 0; j < v.d; ++j)
        if (R.mul(R.p(), h.witness[static_cast<size_t>(i * r + j)]) != h.g[static_cast<size_t>(i * r + j)]) return false;
  std::array<i64, 4> out{};
  residue_defect(R, v, w, h, mode, out);
  for (int k = 0; k < r * r2; ++k)
    if (out[static_cast<size_t>(k)] != 0) return false;
  return true;
}

SmallHomGroup residue_hom_group(const CoefficientRing& R, const SmallWindow& v, const SmallWindow& w, HomMode mode) {
  const int r = v.rank(), r2 = w.rank();
  const int k = r * r2;
  const i64 p = R.p();
  SmallHomGroup out;
  if (k == 0) return out;
  // rows: [defect of the unit unknown | identity]
  std::array<Row, kMaxRows> rows{};
  auto cblock = [&](int i, int j) { return mode == HomMode::Window && i >= w.d && j < v.d; };
  for (int u = 0; u < k; ++u) {
    const int i = u / r, j = u % r;
    SmallHom h;
    if (cblock(i, j)) {
      h.witness[static_cast<size_t>(u)] = 1;
      h.g[static_cast<size_t>(u)] = R.reduce(p);
    } else {
      h.g[static_cast<size_t>(u)] = 1;
    }
    std::array<i64, 4> def{};
    residue_defect(R, v, w, h, mode, def);
    Row& row = rows[static_cast<size_t>(u)];
    for (int c = 0; c < k; ++c) row[static_cast<size_t>(c)] = def[static_cast<size_t>(c)];
    row[static_cast<size_t>(k + u)] = 1;
  }
  const int top = small_howell(R, rows, k, 2 * k);
  // kernel rows: zero defect part
  std::array<Row, kMaxRows> img{};
  int nimg = 0;
  for (int i = 0; i < top; ++i) {
    bool zero = true;
    for (int c = 0; c < k; ++c)
      if (rows[static_cast<size_t>(i)][static_cast<size_t>(c)] != 0) zero = false;
    if (!zero) continue;
    for (int u = 0; u < k; ++u) {
      i64 x = rows[static_cast<size_t>(i)][static_cast<size_t>(k + u)];
      if (x != 0) {
        out.log_p_data_size += R.m() - R.valuation(x);
        break;
      }
    }
    SmallHom h;
    bool nz = false;
    for (int u = 0; u < k; ++u) {
      i64 x = rows[static_cast<size_t>(i)][static_cast<size_t>(k + u)];
      if (cblock(u / r, u % r)) {
        h.witness[static_cast<size_t>(u)] = x;
        h.g[static_cast<size_t>(u)] = R.mul(p, x);
      } else {
        h.g[static_cast<size_t>(u)] = x;
      }
      if (h.g[static_cast<size_t>(u)]) nz = true;
    }
    if (!nz) continue;
    Row gr{};
    for (int u = 0; u < k; ++u) gr[static_cast<size_t>(u)] = h.g[static_cast<size_t>(u)];
    img[static_cast<size_t>(nimg++)] = gr;
    out.generators.push_back(h);
  }
  const int itop = small_howell(R, img, nimg, k);
  for (int i = 0; i < itop; ++i)
    for (int c = 0; c < k; ++c)
      if (img[static_cast<size_t>(i)][static_cast<size_t>(c)] != 0) {
        out.log_p_size += R.m() - R.valuation(img[static_cast<size_t>(i)][static_cast<size_t>(c)]);
        break;
      }
  return out;
}

}  // namespace crystaframe
