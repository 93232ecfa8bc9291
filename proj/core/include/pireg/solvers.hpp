#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pireg/assembly.hpp"
#include "pireg/basis.hpp"
#include "pireg/types.hpp"

namespace pireg {

// Design matrix: row i = phi(x_i)^T.
Mat design_matrix(const BasisSet& basis, const std::vector<Point>& points);

struct RegressionProblem {
  Mat Phi;         // n x d design
  Vec y;           // n targets
  double xi = 0.0; // L2 weight
  double nu = 0.0; // constraint weight
  int n() const { return static_cast<int>(Phi.rows()); }
};

struct OptimizerConfig {
  double learning_rate = 1e-2;
  int max_epochs = 2000;
  double decay = 0.999;  // multiplicative learning-rate decay per epoch
  int patience = 100;    // epochs without validation improvement before stop
  std::uint64_t seed = 0;
};

struct FitReport {
  Vec w;
  // Unset metrics stay NaN until the caller that holds the matching split
  // fills them in.
  double mse_train = std::numeric_limits<double>::quiet_NaN();
  double mse_val = std::numeric_limits<double>::quiet_NaN();
  double mse_test = std::numeric_limits<double>::quiet_NaN();
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  int epochs_run = 0;
  std::int64_t wall_ms = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
};

// Ridge regression: w = (Phi^T Phi + n xi I)^{-1} Phi^T y.
FitReport fit_ridge(const RegressionProblem& prob);

// Closed form for linear constraint systems:
// w = (Phi^T Phi + n (xi I + nu D^T T D))^{-1} Phi^T y.
FitReport fit_pilr_linear(const RegressionProblem& prob, const Mat& D,
                          const Mat& T);
// Same solve against an assembled system. Sparse identity-Gram systems take
// a banded Cholesky + Woodbury path so grid problems stay O(d) in memory.
FitReport fit_pilr_linear(const RegressionProblem& prob,
                          const ConstraintSystem& cs);
// Same closed form with the penalty kernel B = D^T T D precomputed, so a
// hyperparameter search over (xi, nu) pays the K x d product once. The
// physics residual norm is not computable from B and is left unset.
FitReport fit_pilr_kernel(const RegressionProblem& prob, const Mat& B);

// Soft-constrained descent for any system: minimizes
//   (1/n) |y - Phi w|^2 + nu (1/K) |p(w)|^2 + xi |w|^2
// with adaptive-moment updates, exponential learning-rate decay, and early
// stopping on validation MSE (train MSE when no validation split is given).
// Starts from the closed-form solve of the system linearized at w = 0 and
// returns the best-validation iterate. A non-finite run sets `diverged`
// instead of throwing.
FitReport fit_pilr_soft(const RegressionProblem& prob,
                        const ConstraintSystem& cs, const OptimizerConfig& opt,
                        const Mat& Phi_val = Mat(), const Vec& y_val = Vec());

// Model evaluation f_w(x) = w . phi(x) at each point.
Vec predict(const BasisSet& basis, const Vec& w,
            const std::vector<Point>& xs);

// Mean squared difference of two equal-length vectors.
double mse(const Vec& a, const Vec& b);

}  // namespace pireg
