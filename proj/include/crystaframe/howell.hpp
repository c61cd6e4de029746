#pragma once

// Triangular canonical form (Howell form) for submodules of (Z/p^m)^n.
//
// Rows are kept in echelon shape with pivots of the form p^v, entries above
// a pivot reduced into [0, p^v), and the saturation property: every element
// of the span whose first c coordinates vanish is a combination of the rows
// whose pivot column is >= c. The latter makes kernels and membership exact.

#include <vector>

#include "crystaframe/zpm.hpp"

namespace crystaframe {

using Vec = std::vector<i64>;
using Mat = std::vector<Vec>;  // row-major, list of rows

class HowellForm {
 public:
  HowellForm(const CoefficientRing& ring, size_t ncols);
  HowellForm(const CoefficientRing& ring, size_t ncols, const Mat& rows);

  size_t ncols() const { return ncols_; }
  const Mat& rows() const { return rows_; }
  const std::vector<size_t>& pivots() const { return pivot_cols_; }
  const CoefficientRing& ring() const { return ring_; }

  /// Canonical representative of v modulo the row span.
  Vec reduce(Vec v) const;
  bool contains(const Vec& v) const;
  /// Number of elements in the span (as log_p).
  int log_p_size() const;

  void add_rows(const Mat& rows);

 private:
  void rebuild(Mat rows);

  const CoefficientRing& ring_;
  size_t ncols_;
  Mat rows_;
  std::vector<size_t> pivot_cols_;
};

/// Generators of {x : x * A = 0} where A has `rows.size()` rows.
Mat left_kernel(const CoefficientRing& ring, const Mat& a, size_t ncols);

/// Generators of {x : x * A in span(rel)}; the relation rows live in the
/// column space of A.
Mat left_kernel_mod(const CoefficientRing& ring, const Mat& a, size_t ncols, const Mat& rel);

/// Affine solution set of x * A = b (mod span(rel)): particular + kernel.
struct AffineSolution {
  bool solvable = false;
  Vec particular;
  Mat homogeneous;
};
AffineSolution solve_left(const CoefficientRing& ring, const Mat& a, size_t ncols, const Vec& b,
                          const Mat& rel = {});

bool is_zero(const Vec& v);

}  // namespace crystaframe
