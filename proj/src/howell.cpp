#include "crystaframe/howell.hpp"

#include <algorithm>

namespace crystaframe {

bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](i64 x) { return x == 0; });
}

HowellForm::HowellForm(const CoefficientRing& ring, size_t ncols) : ring_(ring), ncols_(ncols) {}

HowellForm::HowellForm(const CoefficientRing& ring, size_t ncols, const Mat& rows)
    : ring_(ring), ncols_(ncols) {
  rebuild(rows);
}

void HowellForm::add_rows(const Mat& rows) {
  Mat all = rows_;
  all.insert(all.end(), rows.begin(), rows.end());
  rebuild(std::move(all));
}

void HowellForm::rebuild(Mat work) {
  const i64 p = ring_.p();
  const int m = ring_.m();
  for (auto& r : work) {
    if (r.size() != ncols_) throw AlgebraError("HowellForm: row length mismatch");
    for (auto& x : r) x = ring_.reduce(x);
  }
  Mat out;
  std::vector<size_t> piv;
  for (size_t c = 0; c < ncols_; ++c) {
    // rows of `work` that still have leading position >= c
    size_t best = work.size();
    int best_v = m;
    for (size_t i = 0; i < work.size(); ++i) {
      if (work[i][c] == 0) continue;
      int v = ring_.valuation(work[i][c]);
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    if (best == work.size()) continue;
    Vec prow = work[best];
    work.erase(work.begin() + static_cast<long>(best));
    // normalize pivot to p^v
    i64 unit = prow[c] / ipow(p, best_v);
    i64 uinv = ring_.inverse(unit);
    for (auto& x : prow) x = ring_.mul(x, uinv);
    const i64 pv = ipow(p, best_v);
    // eliminate below
    for (auto& r : work) {
      if (r[c] == 0) continue;
      i64 f = r[c] / pv;  // exact: valuation of r[c] >= best_v
      for (size_t j = c; j < ncols_; ++j) r[j] = ring_.sub(r[j], ring_.mul(f, prow[j]));
    }
    // saturation row p^{m-v} * prow has zero at column c
    if (best_v > 0) {
      Vec sat(ncols_);
      i64 s = ipow(p, m - best_v);
      bool nz = false;
      for (size_t j = 0; j < ncols_; ++j) {
        sat[j] = ring_.mul(s, prow[j]);
        nz = nz || sat[j] != 0;
      }
      if (nz) work.push_back(std::move(sat));
    }
    out.push_back(std::move(prow));
    piv.push_back(c);
    work.erase(std::remove_if(work.begin(), work.end(), [](const Vec& r) { return is_zero(r); }),
               work.end());
  }
  // reduce entries above pivots
  for (size_t k = 0; k < out.size(); ++k) {
    const size_t c = piv[k];
    const i64 pv = out[k][c];
    for (size_t i = 0; i < k; ++i) {
      i64 f = out[i][c] / pv;
      if (f == 0) continue;
      for (size_t j = c; j < ncols_; ++j) out[i][j] = ring_.sub(out[i][j], ring_.mul(f, out[k][j]));
    }
  }
  rows_ = std::move(out);
  pivot_cols_ = std::move(piv);
}

Vec HowellForm::reduce(Vec v) const {
  for (auto& x : v) x = ring_.reduce(x);
  for (size_t k = 0; k < rows_.size(); ++k) {
    const size_t c = pivot_cols_[k];
    const i64 pv = rows_[k][c];
    i64 f = v[c] / pv;
    if (f == 0) continue;
    for (size_t j = c; j < ncols_; ++j) v[j] = ring_.sub(v[j], ring_.mul(f, rows_[k][j]));
  }
  return v;
}

bool HowellForm::contains(const Vec& v) const { return is_zero(reduce(v)); }

int HowellForm::log_p_size() const {
  int s = 0;
  for (size_t k = 0; k < rows_.size(); ++k) s += ring_.m() - ring_.valuation(rows_[k][pivot_cols_[k]]);
  return s;
}

Mat left_kernel_mod(const CoefficientRing& ring, const Mat& a, size_t ncols, const Mat& rel) {
  const size_t n = a.size();
  const size_t nr = rel.size();
  // [A | I_n] stacked with [Rel | 0]
  Mat aug;
  aug.reserve(n + nr);
  for (size_t i = 0; i < n; ++i) {
    Vec row(ncols + n, 0);
    std::copy(a[i].begin(), a[i].end(), row.begin());
    row[ncols + i] = 1;
    aug.push_back(std::move(row));
  }
  for (const auto& r : rel) {
    Vec row(ncols + n, 0);
    std::copy(r.begin(), r.end(), row.begin());
    aug.push_back(std::move(row));
  }
  HowellForm h(ring, ncols + n, aug);
  Mat ker;
  for (size_t k = 0; k < h.rows().size(); ++k) {
    if (h.pivots()[k] < ncols) continue;
    ker.emplace_back(h.rows()[k].begin() + static_cast<long>(ncols), h.rows()[k].end());
  }
  return ker;
}

Mat left_kernel(const CoefficientRing& ring, const Mat& a, size_t ncols) {
  return left_kernel_mod(ring, a, ncols, {});
}

AffineSolution solve_left(const CoefficientRing& ring, const Mat& a, size_t ncols, const Vec& b,
                          const Mat& rel) {
  Mat ext = a;
  Vec nb(b.size());
  for (size_t j = 0; j < b.size(); ++j) nb[j] = ring.neg(b[j]);
  ext.push_back(nb);
  Mat ker = left_kernel_mod(ring, ext, ncols, rel);
  const size_t n = a.size();
  AffineSolution sol;
  for (const auto& k : ker) {
    if (ring.is_unit(k[n])) {
      i64 inv = ring.inverse(k[n]);
      sol.particular.assign(n, 0);
      for (size_t i = 0; i < n; ++i) sol.particular[i] = ring.mul(k[i], inv);
      sol.solvable = true;
      break;
    }
  }
  if (!sol.solvable) return sol;
  sol.homogeneous = left_kernel_mod(ring, a, ncols, rel);
  return sol;
}

}  // namespace crystaframe
