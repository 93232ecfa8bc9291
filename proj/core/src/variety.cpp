#include "pireg/variety.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pireg/banded.hpp"
#include "pireg/rng.hpp"

namespace pireg {

namespace {

BasisFamily family_for(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::HarmonicOscillator: return BasisFamily::Fourier1D;
    case OperatorKind::ContinuousDiffusion: return BasisFamily::DiffusionTensor;
    case OperatorKind::EulerBernoulli: return BasisFamily::GridIndicator1D;
    case OperatorKind::FdmDiffusion: return BasisFamily::GridIndicator2D;
  }
  throw config_error("unknown operator kind");
}

// Dense evaluation grid for the least-squares projection. Half-open in x and
// in the 1-D axis so trigonometric columns stay numerically orthogonal.
std::vector<Point> projection_grid(const BasisSet& basis) {
  const BasisSpec& spec = basis.spec();
  std::vector<Point> grid;
  if (basis.domain_dim() == 1) {
    const int m = std::max(512, 8 * basis.size());
    grid.reserve(m);
    for (int i = 0; i < m; ++i) grid.push_back(pt(spec.T * i / m));
  } else {
    const int m_x = std::max(32, 4 * spec.d_x);
    const int m_t = std::max(32, 4 * spec.d_t);
    grid.reserve(static_cast<std::size_t>(m_x) * m_t);
    for (int i = 0; i < m_t; ++i) {
      const double t = spec.T * i / (m_t - 1);
      for (int j = 0; j < m_x; ++j) {
        grid.push_back(pt(-spec.Xi + 2.0 * spec.Xi * j / m_x, t));
      }
    }
  }
  return grid;
}

Vec project_continuous(const BasisSet& basis, const GroundTruth& gt,
                       const std::vector<Point>& grid) {
  const int m = static_cast<int>(grid.size());
  Mat A(m, basis.size());
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    A.row(i) = basis.eval(grid[i]).transpose();
    b[i] = gt.eval(grid[i]);
  }
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(b);
}

// Indicator bases represent grid functions exactly: the coefficients are the
// rollout values at the representable nodes, in cell order.
Vec project_discrete(const BasisSet& basis, const GroundTruth& gt) {
  const Mat& g = gt.grid;
  Vec w(basis.size());
  if (basis.spec().family == BasisFamily::GridIndicator1D) {
    if (g.rows() != basis.n_t() + 1 || g.cols() != 1)
      throw config_error("rollout shape does not match the indicator grid");
    w = g.col(0).head(basis.n_t());
  } else {
    const int n_t = basis.n_t(), n_x = basis.n_x();
    if (g.rows() != n_t + 1 || g.cols() != n_x)
      throw config_error("rollout shape does not match the indicator grid");
    for (int tau = 0; tau <= n_t; ++tau)
      for (int j = 0; j < n_x; ++j) w[tau * n_x + j] = g(tau, j);
  }
  return w;
}

double residual_sup(const Operator& op, const BasisSet& basis, const Vec& w,
                    const std::vector<Point>& grid) {
  double sup = 0.0;
  if (basis.is_grid()) {
    for (int node : residual_nodes(basis))
      sup = std::max(sup, std::abs(apply(op, basis, w, node)));
  } else {
    for (const Point& p : grid)
      sup = std::max(sup, std::abs(apply(op, basis, w, p)));
  }
  return sup;
}

}  // namespace

int numeric_rank(const Mat& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  if (!A.allFinite()) throw std::runtime_error("rank of a non-finite matrix");
  Eigen::BDCSVD<Mat> svd(A);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  const double cut = rel_tol * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  return rank;
}

DimReport dim_linear(const Mat& D, double rel_tol) {
  DimReport report;
  report.method = DimReport::Method::RankNullity;
  report.d = static_cast<int>(D.cols());
  report.tol = rel_tol;
  report.d_V = report.d - numeric_rank(D, rel_tol);
  return report;
}

DimReport dim_linear(const ConstraintSystem& cs, double rel_tol) {
  if (!cs.linear())
    throw config_error(
        "rank-nullity dimension needs a linear constraint system; sample the "
        "Jacobian instead");
  DimReport report;
  report.method = DimReport::Method::RankNullity;
  report.d = cs.d();
  report.tol = rel_tol;
  if (cs.K() == 0) {
    report.d_V = cs.d();
    return report;
  }
  const int rank = cs.is_sparse() ? band_rank(cs.sparse_D(), rel_tol)
                                  : numeric_rank(cs.dense_D(), rel_tol);
  report.d_V = cs.d() - rank;
  return report;
}

std::vector<Vec> sample_variety_points(const ProblemSpec& problem,
                                       const BasisSet& basis, int N,
                                       std::uint64_t seed) {
  if (N <= 0) throw config_error("variety sample count must be positive");
  if (family_for(problem.op.kind) != basis.spec().family)
    throw config_error("operator and basis family do not match");
  const Operator op = make_operator(problem.op);
  const std::vector<Point> grid =
      basis.is_grid() ? std::vector<Point>{} : projection_grid(basis);

  auto seeder = rng_stream(seed, kStreamVarietySamples);
  std::vector<Vec> points;
  points.reserve(N);
  for (int i = 0; i < N; ++i) {
    const std::uint64_t sample_seed = seeder();
    const GroundTruth gt = generate_solution(problem, sample_seed);
    Vec w = gt.discrete() ? project_discrete(basis, gt)
                          : project_continuous(basis, gt, grid);
    const double sup = residual_sup(op, basis, w, grid);
    if (!(sup <= 1e-6 * (1.0 + w.norm())))
      throw std::runtime_error(
          "variety sample projection failed: the basis cannot represent a "
          "sampled solution (sup residual " +
          std::to_string(sup) + ")");
    points.push_back(std::move(w));
  }
  return points;
}

DimReport dim_sampled(const ConstraintSystem& cs, const std::vector<Vec>& points,
                      double rel_tol) {
  if (points.empty()) throw config_error("no variety samples to rank");
  DimReport report;
  report.method = DimReport::Method::SampledJacobian;
  report.d = cs.d();
  report.tol = rel_tol;
  report.N = static_cast<int>(points.size());
  int best = 0;
  for (const Vec& w : points) {
    if (w.size() != cs.d())
      throw config_error("variety sample has the wrong dimension");
    int rank;
    if (cs.is_sparse() || !cs.linear()) {
      rank = band_rank(cs.residual_jacobian_sparse(w), rel_tol);
    } else {
      rank = numeric_rank(cs.residual_jacobian(w), rel_tol);
    }
    report.sample_ranks.push_back(rank);
    best = std::max(best, cs.d() - rank);
  }
  report.d_V = best;
  return report;
}

double effective_dim_bound(const Mat& D, const Mat& T, double xi, double nu,
                           double rel_tol) {
  if (!(xi > 0.0)) throw config_error("ridge weight must be positive");
  if (nu < 0.0) throw config_error("constraint weight must be nonnegative");
  if (T.rows() != D.rows() || T.cols() != D.rows())
    throw config_error("trial Gram shape does not match the constraint rows");
  const int d = static_cast<int>(D.cols());
  if (d == 0) return 0.0;
  // With no constraint weight every direction contributes the plain ridge
  // shrinkage factor; skip the eigendecomposition and return the closed form.
  if (nu == 0.0) return d / (1.0 + xi);
  Mat B = D.transpose() * T * D;
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(B);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of the penalty kernel failed");
  const Vec& alpha = eig.eigenvalues();
  const double amax = alpha.size() > 0 ? alpha[alpha.size() - 1] : 0.0;
  if (amax <= 0.0) return d / (1.0 + xi);
  const double cut = rel_tol * amax;
  double bound = 0.0;
  for (int i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= cut)
      bound += 1.0 / (1.0 + xi);
    else
      bound += 1.0 / (1.0 + xi + nu * alpha[i]);
  }
  return bound;
}

std::string beta_upper_bound(int rho, int d) {
  if (rho < 1) throw config_error("nonlinearity degree must be at least 1");
  if (d < 0) throw config_error("ambient dimension must be nonnegative");
  // Exact product rho * (2 rho - 1)^(d+1) in base-1e9 limbs.
  const std::uint64_t base = 1000000000ull;
  const std::uint64_t m = static_cast<std::uint64_t>(2 * rho - 1);
  std::vector<std::uint64_t> limbs{static_cast<std::uint64_t>(rho)};
  for (int e = 0; e <= d; ++e) {
    std::uint64_t carry = 0;
    for (std::uint64_t& limb : limbs) {
      const std::uint64_t v = limb * m + carry;
      limb = v % base;
      carry = v / base;
    }
    while (carry != 0) {
      limbs.push_back(carry % base);
      carry /= base;
    }
  }
  std::string out = std::to_string(limbs.back());
  for (int i = static_cast<int>(limbs.size()) - 2; i >= 0; --i) {
    std::string part = std::to_string(limbs[i]);
    out += std::string(9 - part.size(), '0') + part;
  }
  return out;
}

}  // namespace pireg
