#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "pireg/types.hpp"

namespace pireg {

using SpMat = Eigen::SparseMatrix<double>;

// Symmetric positive-definite band matrix, LAPACK lower band storage.
// Grid constraint kernels xi*I + nu*D^T D have bandwidth ~2 n_x, so the
// Cholesky factor costs O(n kd^2) instead of O(n^3).
class BandedSpd {
 public:
  BandedSpd(int n, int kd);

  int n() const { return n_; }
  int kd() const { return kd_; }

  // Accumulate entry (i, j) of the symmetric matrix; only the lower
  // triangle within the band is stored.
  void add(int i, int j, double v);

  // In-place Cholesky (dpbtrf). Throws std::runtime_error if not SPD.
  void factor();

  // Back-substitution against the factored matrix (dpbtrs).
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& B) const;

 private:
  int n_, kd_;
  bool factored_ = false;
  std::vector<double> ab_;  // (kd+1) x n, column-major
};

// xi*I + nu * D^T D as a band matrix (identity trial Gram).
BandedSpd banded_normal_kernel(const SpMat& D, double xi, double nu);

// Singular values of a sparse band matrix, descending, via band
// bidiagonalization (dgbbrd) + bidiagonal SVD (dbdsqr). No squaring, so
// small singular values keep full relative accuracy.
Vec band_singular_values(const SpMat& A);

// Count of singular values above tol_rel * sigma_max.
int band_rank(const SpMat& A, double tol_rel);

}  // namespace pireg
