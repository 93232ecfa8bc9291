#include "pireg/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace pireg {

BandedSpd::BandedSpd(int n, int kd) : n_(n), kd_(kd) {
  if (n < 1 || kd < 0 || kd >= n)
    throw config_error("BandedSpd: need 0 <= kd < n");
  ab_.assign(static_cast<std::size_t>(kd_ + 1) * n_, 0.0);
}

void BandedSpd::add(int i, int j, double v) {
  if (factored_) throw std::runtime_error("BandedSpd: already factored");
  if (j > i) std::swap(i, j);  // symmetric; keep the lower triangle
  if (i < 0 || i >= n_) throw config_error("BandedSpd: index out of range");
  if (i - j > kd_) throw config_error("BandedSpd: entry outside the band");
  ab_[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (kd_ + 1)] += v;
}

void BandedSpd::factor() {
  if (factored_) return;
  lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', n_, kd_, ab_.data(),
                                   kd_ + 1);
  if (info != 0)
    throw std::runtime_error("BandedSpd: Cholesky failed, matrix not SPD (info=" +
                             std::to_string(info) + ")");
  factored_ = true;
}

Vec BandedSpd::solve(const Vec& b) const {
  if (!factored_) throw std::runtime_error("BandedSpd: factor() first");
  if (b.size() != n_) throw config_error("BandedSpd: RHS size mismatch");
  Vec x = b;
  lapack_int info = LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', n_, kd_, 1, ab_.data(),
                                   kd_ + 1, x.data(), n_);
  if (info != 0) throw std::runtime_error("BandedSpd: solve failed");
  return x;
}

Mat BandedSpd::solve(const Mat& B) const {
  if (!factored_) throw std::runtime_error("BandedSpd: factor() first");
  if (B.rows() != n_) throw config_error("BandedSpd: RHS size mismatch");
  Mat X = B;
  lapack_int info = LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', n_, kd_,
                                   static_cast<lapack_int>(X.cols()), ab_.data(),
                                   kd_ + 1, X.data(), n_);
  if (info != 0) throw std::runtime_error("BandedSpd: solve failed");
  return X;
}

BandedSpd banded_normal_kernel(const SpMat& D, double xi, double nu) {
  const int d = static_cast<int>(D.cols());
  SpMat P;
  int kd = 0;
  if (nu != 0.0) {
    P = SpMat(D.transpose()) * D;
    P.prune(0.0);
    for (int c = 0; c < P.outerSize(); ++c)
      for (SpMat::InnerIterator it(P, c); it; ++it)
        kd = std::max(kd, std::abs(static_cast<int>(it.row()) - static_cast<int>(it.col())));
  }
  BandedSpd A(d, kd);
  for (int i = 0; i < d; ++i) A.add(i, i, xi);
  if (nu != 0.0) {
    for (int c = 0; c < P.outerSize(); ++c)
      for (SpMat::InnerIterator it(P, c); it; ++it)
        if (it.row() >= it.col()) A.add(static_cast<int>(it.row()),
                                        static_cast<int>(it.col()), nu * it.value());
  }
  return A;
}

Vec band_singular_values(const SpMat& A) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (m < 1 || n < 1) throw config_error("band_singular_values: empty matrix");
  int kl = 0, ku = 0;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      kl = std::max(kl, i - j);
      ku = std::max(ku, j - i);
    }
  // dgbbrd wants at least one superdiagonal slot when ku = 0
  ku = std::max(ku, 1);

  const int ldab = kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      ab[static_cast<std::size_t>(ku + i - j) + static_cast<std::size_t>(j) * ldab] =
          it.value();
    }

  const int mn = std::min(m, n);
  std::vector<double> diag(mn, 0.0), off(std::max(mn - 1, 1), 0.0);
  lapack_int info = LAPACKE_dgbbrd(LAPACK_COL_MAJOR, 'N', m, n, 0, kl, ku,
                                   ab.data(), ldab, diag.data(), off.data(),
                                   nullptr, 1, nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("band_singular_values: dgbbrd failed");
  char uplo = m >= n ? 'U' : 'L';
  info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, uplo, mn, 0, 0, 0, diag.data(),
                        off.data(), nullptr, 1, nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("band_singular_values: dbdsqr failed");
  Vec s(mn);
  for (int i = 0; i < mn; ++i) s[i] = diag[i];
  return s;
}

int band_rank(const SpMat& A, double tol_rel) {
  Vec s = band_singular_values(A);
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  double cut = tol_rel * s[0];
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++rank;
  return rank;
}

}  // namespace pireg
