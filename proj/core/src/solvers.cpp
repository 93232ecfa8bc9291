#include "pireg/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pireg/banded.hpp"

namespace pireg {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               t0)
      .count();
}

void check_problem(const RegressionProblem& prob) {
  if (prob.Phi.rows() < 1) throw config_error("empty design matrix");
  if (prob.y.size() != prob.Phi.rows())
    throw config_error("target length does not match the design rows");
  if (!(prob.xi >= 0.0) || !(prob.nu >= 0.0))
    throw config_error("regularization weights must be nonnegative");
  if (!prob.Phi.allFinite() || !prob.y.allFinite())
    throw config_error("non-finite design or targets");
}

// Residual-driven refinement of an approximate normal-equation solve.
// `apply` multiplies by the exact kernel Phi^T Phi + A, `solve` reuses the
// factorization. Accepts when the residual reaches 1e-8 |rhs| or the
// backward-stable floor eps * |K| * |w|, whichever is larger; a kernel with
// huge |A| (stencil entries scale like 1/h) pins the attainable residual to
// that floor no matter how the solve is arranged.
template <typename Apply, typename Solve>
Vec refine_normal(const Vec& rhs, double kernel_scale, const Apply& apply,
                  const Solve& solve) {
  const double strict = 1e-8 * rhs.norm() + 1e-300;
  Vec w = solve(rhs);
  double best = std::numeric_limits<double>::infinity();
  Vec best_w = w;
  for (int iter = 0; iter < 4; ++iter) {
    if (!w.allFinite()) break;
    const Vec r = rhs - apply(w);
    const double rn = r.norm();
    if (rn < best) {
      best = rn;
      best_w = w;
    }
    if (rn <= strict) return w;
    w += solve(r);
  }
  const double floor =
      64.0 * std::numeric_limits<double>::epsilon() * kernel_scale *
      best_w.norm();
  if (best_w.allFinite() && best <= std::max(strict, floor)) return best_w;
  throw std::runtime_error("singular normal equations; raise the ridge weight");
}

// Solve (Phi^T Phi + A) w = Phi^T y by LDLT with iterative refinement and a
// trace-scaled jitter retry. Failing even the refined check means the system
// really is singular at this regularization.
Vec solve_normal_dense(const Mat& Phi, const Vec& y, const Mat& A) {
  const Mat K = Phi.transpose() * Phi + A;
  const Vec rhs = Phi.transpose() * y;
  const double scale = K.norm();
  auto apply = [&](const Vec& w) { return Vec(K * w); };
  Eigen::LDLT<Mat> ldlt(K);
  if (ldlt.info() == Eigen::Success) {
    try {
      return refine_normal(rhs, scale, apply,
                           [&](const Vec& b) { return Vec(ldlt.solve(b)); });
    } catch (const std::runtime_error&) {
      // fall through to the jittered retry
    }
  }
  double jitter = 1e-12 * K.trace();
  if (!(jitter > 0.0)) jitter = 1e-300;
  const Mat Kj = K + jitter * Mat::Identity(K.rows(), K.cols());
  Eigen::LDLT<Mat> ldltj(Kj);
  return refine_normal(rhs, scale, apply,
                       [&](const Vec& b) { return Vec(ldltj.solve(b)); });
}

// Ridge with fewer observations than coefficients: the primal system
// (Phi^T Phi + lam I) w = Phi^T y has the equivalent dual form
//   w = Phi^T alpha,  (Phi Phi^T + lam I_n) alpha = y,
// an n x n SPD solve instead of a d x d one. The result is verified against
// the primal residual so both routes meet the same contract; a miss throws
// and the caller falls back to the dense path.
Vec solve_ridge_dual(const Mat& Phi, const Vec& y, double lam) {
  const int n = static_cast<int>(Phi.rows());
  Mat G = Phi * Phi.transpose();
  G.diagonal().array() += lam;
  Eigen::LDLT<Mat> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error(
        "singular normal equations; raise the ridge weight");
  auto apply = [&](const Vec& a) {
    return Vec(Phi * (Phi.transpose() * a) + lam * a);
  };
  const double dual_scale = Phi.squaredNorm() + lam * std::sqrt(double(n));
  const Vec alpha =
      refine_normal(y, dual_scale, apply,
                    [&](const Vec& b) { return Vec(ldlt.solve(b)); });
  const Vec w = Phi.transpose() * alpha;

  const Vec rhs = Phi.transpose() * y;
  const Vec resid = Phi.transpose() * (Phi * w) + lam * w - rhs;
  const double d_cols = static_cast<double>(Phi.cols());
  const double primal_scale = Phi.squaredNorm() + lam * std::sqrt(d_cols);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       primal_scale * w.norm();
  if (resid.norm() > std::max(1e-8 * rhs.norm() + 1e-300, floor))
    throw std::runtime_error(
        "singular normal equations; raise the ridge weight");
  return w;
}

// Grid path: with A = n (xi I + nu D^T D) banded SPD and G = A^{-1} Phi^T,
// the Woodbury identity gives w = G (y - S^{-1} Phi G y), S = I + Phi G.
// Only the d x n solve and an n x n factorization touch dense storage. The
// identity cancels heavily when nu/xi is large, so the refinement loop does
// real work here.
Vec solve_normal_banded(const Mat& Phi, const Vec& y, const SpMat& D,
                        double n_xi, double n_nu) {
  BandedSpd A = banded_normal_kernel(D, n_xi, n_nu);
  A.factor();
  const int n = static_cast<int>(Phi.rows());
  const Mat Z = A.solve(Mat(Phi.transpose()));  // d x n
  const Mat S = Mat::Identity(n, n) + Phi * Z;
  const Eigen::LDLT<Mat> S_ldlt(S);
  if (S_ldlt.info() != Eigen::Success)
    throw std::runtime_error("grid normal equations are not positive definite");

  // w = K^{-1} b for the full kernel K = Phi^T Phi + A_band.
  auto solve = [&](const Vec& b) {
    const Vec gb = A.solve(b);
    const Vec t = S_ldlt.solve(Phi * gb);
    return Vec(gb - Z * t);
  };
  auto apply = [&](const Vec& w) {
    return Vec(Phi.transpose() * (Phi * w) + n_xi * w +
               n_nu * (D.transpose() * (D * w)));
  };
  const double phi2 = Phi.squaredNorm();
  const double scale =
      phi2 + n_xi * std::sqrt(static_cast<double>(D.cols())) +
      n_nu * D.squaredNorm();
  const Vec rhs = Phi.transpose() * y;
  return refine_normal(rhs, scale, apply, solve);
}

double train_mse(const RegressionProblem& prob, const Vec& w) {
  return (prob.Phi * w - prob.y).squaredNorm() / prob.Phi.rows();
}

}  // namespace

Mat design_matrix(const BasisSet& basis, const std::vector<Point>& points) {
  Mat Phi(static_cast<int>(points.size()), basis.size());
  for (int i = 0; i < Phi.rows(); ++i)
    Phi.row(i) = basis.eval(points[i]).transpose();
  return Phi;
}

FitReport fit_ridge(const RegressionProblem& prob) {
  const auto t0 = Clock::now();
  check_problem(prob);
  const int n = static_cast<int>(prob.Phi.rows());
  const int d = static_cast<int>(prob.Phi.cols());
  const double lam = n * prob.xi;
  FitReport report;
  if (lam > 0.0 && n < d) {
    try {
      report.w = solve_ridge_dual(prob.Phi, prob.y, lam);
      report.mse_train = train_mse(prob, report.w);
      report.wall_ms = ms_since(t0);
      return report;
    } catch (const std::runtime_error&) {
      // dual route missed the residual contract; retry in primal form
    }
  }
  Mat A = Mat::Zero(d, d);
  A.diagonal().array() += lam;
  report.w = solve_normal_dense(prob.Phi, prob.y, A);
  report.mse_train = train_mse(prob, report.w);
  report.wall_ms = ms_since(t0);
  return report;
}

FitReport fit_pilr_linear(const RegressionProblem& prob, const Mat& D,
                          const Mat& T) {
  const auto t0 = Clock::now();
  check_problem(prob);
  const int d = static_cast<int>(prob.Phi.cols());
  const int K = static_cast<int>(D.rows());
  if (D.cols() != d) throw config_error("constraint columns do not match d");
  if (T.rows() != K || T.cols() != K)
    throw config_error("trial Gram shape does not match the constraint rows");
  Mat A = prob.nu != 0.0 && K > 0 ? Mat(prob.nu * (D.transpose() * T * D))
                                  : Mat(Mat::Zero(d, d));
  A *= prob.Phi.rows();
  A.diagonal().array() += prob.Phi.rows() * prob.xi;
  FitReport report;
  report.w = solve_normal_dense(prob.Phi, prob.y, A);
  report.mse_train = train_mse(prob, report.w);
  report.residual_norm = (D * report.w).norm();
  report.wall_ms = ms_since(t0);
  return report;
}

FitReport fit_pilr_kernel(const RegressionProblem& prob, const Mat& B) {
  const auto t0 = Clock::now();
  check_problem(prob);
  const int d = static_cast<int>(prob.Phi.cols());
  if (B.rows() != d || B.cols() != d)
    throw config_error("penalty kernel shape does not match d");
  Mat A = prob.nu != 0.0 ? Mat(prob.nu * B) : Mat(Mat::Zero(d, d));
  A *= prob.Phi.rows();
  A.diagonal().array() += prob.Phi.rows() * prob.xi;
  FitReport report;
  report.w = solve_normal_dense(prob.Phi, prob.y, A);
  report.mse_train = train_mse(prob, report.w);
  report.wall_ms = ms_since(t0);
  return report;
}

FitReport fit_pilr_linear(const RegressionProblem& prob,
                          const ConstraintSystem& cs) {
  if (!cs.linear())
    throw config_error(
        "closed-form fit needs a linear constraint system; use the "
        "soft-constrained solver");
  if (cs.d() != prob.Phi.cols())
    throw config_error("constraint columns do not match d");
  if (cs.is_sparse() && cs.gram_is_identity() && prob.xi > 0.0) {
    const auto t0 = Clock::now();
    check_problem(prob);
    const double n = prob.Phi.rows();
    FitReport report;
    report.w = solve_normal_banded(prob.Phi, prob.y, cs.sparse_D(),
                                   n * prob.xi, n * prob.nu);
    report.mse_train = train_mse(prob, report.w);
    report.residual_norm = (cs.sparse_D() * report.w).norm();
    report.wall_ms = ms_since(t0);
    return report;
  }
  const Mat& D = cs.dense_D();
  const Mat T = cs.gram_is_identity() ? Mat(Mat::Identity(cs.K(), cs.K()))
                                      : cs.gram();
  return fit_pilr_linear(prob, D, T);
}

FitReport fit_pilr_soft(const RegressionProblem& prob,
                        const ConstraintSystem& cs, const OptimizerConfig& opt,
                        const Mat& Phi_val, const Vec& y_val) {
  const auto t0 = Clock::now();
  check_problem(prob);
  const int d = cs.d();
  const int K = cs.K();
  const int n = prob.n();
  if (prob.Phi.cols() != d) throw config_error("design columns do not match d");
  if (!(opt.learning_rate > 0.0)) throw config_error("learning rate must be positive");
  if (opt.patience < 1) throw config_error("patience must be at least 1");
  if (opt.max_epochs < 0) throw config_error("epoch budget must be nonnegative");
  if (!(opt.decay > 0.0 && opt.decay <= 1.0))
    throw config_error("learning-rate decay must lie in (0, 1]");
  const bool has_val = Phi_val.rows() > 0;
  if (has_val && (Phi_val.cols() != d || y_val.size() != Phi_val.rows()))
    throw config_error("validation split shape mismatch");

  FitReport report;
  report.seed = opt.seed;

  // Warm start: closed form of the system linearized at w = 0, with the
  // constraint weight rescaled to match the K-averaged soft penalty.
  const double nu_cf = K > 0 ? prob.nu / K : 0.0;
  Vec w = Vec::Zero(d);
  try {
    if (prob.xi > 0.0) {
      const SpMat D0 = cs.residual_jacobian_sparse(Vec::Zero(d));
      w = solve_normal_banded(prob.Phi, prob.y, D0, n * prob.xi, n * nu_cf);
    } else if (d <= 4000) {
      const Mat D0 = cs.residual_jacobian(Vec::Zero(d));
      Mat A = nu_cf != 0.0 && K > 0 ? Mat(nu_cf * (D0.transpose() * D0))
                                    : Mat(Mat::Zero(d, d));
      A *= n;
      w = solve_normal_dense(prob.Phi, prob.y, A);
    }
  } catch (const std::runtime_error&) {
    w = Vec::Zero(d);  // descend from the origin instead
  }

  const double inv_n = 1.0 / n;
  const double pen = K > 0 ? prob.nu / K : 0.0;
  auto objective = [&](const Vec& v, Vec* grad) {
    const Vec r = prob.Phi * v - prob.y;
    double L = inv_n * r.squaredNorm() + prob.xi * v.squaredNorm();
    Vec p;
    if (K > 0) {
      p = cs.residual(v);
      L += pen * p.squaredNorm();
    }
    if (grad) {
      *grad = (2.0 * inv_n) * (prob.Phi.transpose() * r) + (2.0 * prob.xi) * v;
      if (K > 0 && pen != 0.0)
        *grad += (2.0 * pen) *
                 Vec(cs.residual_jacobian_sparse(v).transpose() * p);
    }
    return L;
  };
  auto score = [&](const Vec& v) {
    if (has_val) return (Phi_val * v - y_val).squaredNorm() / Phi_val.rows();
    return (prob.Phi * v - prob.y).squaredNorm() * inv_n;
  };

  // Adaptive-moment descent, one full-batch step per epoch.
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Vec m = Vec::Zero(d), v2 = Vec::Zero(d), grad(d);
  Vec best_w = w;
  double best_score = score(w);
  if (!std::isfinite(best_score)) {
    report.diverged = true;
    best_score = std::numeric_limits<double>::infinity();
  }
  int since_best = 0;
  double lr = opt.learning_rate;
  int epoch = 0;
  for (; epoch < opt.max_epochs; ++epoch) {
    const double L = objective(w, &grad);
    if (!std::isfinite(L) || !grad.allFinite()) {
      report.diverged = true;
      break;
    }
    const int k = epoch + 1;
    m = b1 * m + (1.0 - b1) * grad;
    v2 = b2 * v2 + (1.0 - b2) * Vec(grad.cwiseProduct(grad));
    const Vec mhat = m / (1.0 - std::pow(b1, k));
    const Vec vhat = v2 / (1.0 - std::pow(b2, k));
    w -= lr * Vec(mhat.array() / (vhat.array().sqrt() + eps));
    lr *= opt.decay;
    if (!w.allFinite()) {
      report.diverged = true;
      break;
    }
    const double s = score(w);
    if (std::isfinite(s) && s < best_score) {
      best_score = s;
      best_w = w;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      ++epoch;
      break;
    }
  }

  report.w = best_w;
  report.epochs_run = epoch;
  report.mse_train = train_mse(prob, best_w);
  if (has_val)
    report.mse_val = (Phi_val * best_w - y_val).squaredNorm() / Phi_val.rows();
  report.residual_norm = K > 0 ? cs.residual(best_w).norm() : 0.0;
  report.wall_ms = ms_since(t0);
  return report;
}

Vec predict(const BasisSet& basis, const Vec& w,
            const std::vector<Point>& xs) {
  if (w.size() != basis.size())
    throw config_error("coefficient length does not match the basis");
  Vec out(static_cast<int>(xs.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = basis.eval(xs[i]).dot(w);
  return out;
}

double mse(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() < 1)
    throw config_error("mean squared error needs equal nonempty lengths");
  return (a - b).squaredNorm() / a.size();
}

}  // namespace pireg
