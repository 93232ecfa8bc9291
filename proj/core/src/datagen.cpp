#include "pireg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pireg/rng.hpp"

namespace pireg {

namespace {

constexpr double kPi = 3.14159265358979323846;

int steps_of(double extent, double step, const char* what) {
  if (step <= 0.0) throw config_error(std::string(what) + ": step must be positive");
  int n = static_cast<int>(std::llround(extent / step));
  if (n < 1 || std::abs(n * step - extent) > 1e-9 * extent)
    throw config_error(std::string(what) + ": step does not divide extent");
  return n;
}

}  // namespace

bool GroundTruth::discrete() const {
  return problem.op.kind == OperatorKind::EulerBernoulli ||
         problem.op.kind == OperatorKind::FdmDiffusion;
}

double GroundTruth::eval(const Point& p) const {
  switch (problem.op.kind) {
    case OperatorKind::HarmonicOscillator: {
      double w = std::sqrt(problem.op.k_s / problem.op.m_s);
      return y0 * std::cos(w * p[0]) + (v0 / w) * std::sin(w * p[0]);
    }
    case OperatorKind::ContinuousDiffusion: {
      double u = 0.0;
      for (std::size_t j = 0; j < modes.size(); ++j) {
        double wj = j * kPi / problem.Xi;
        u += (modes[j][0] * std::cos(wj * p[0]) + modes[j][1] * std::sin(wj * p[0])) *
             std::exp(-problem.op.c * wj * wj * p[1]);
      }
      return u;
    }
    case OperatorKind::EulerBernoulli: {
      int tau = static_cast<int>(std::llround(p[0] / problem.op.h_t));
      tau = std::clamp(tau, 0, static_cast<int>(grid.rows()) - 1);
      return grid(tau, 0);
    }
    case OperatorKind::FdmDiffusion: {
      int tau = static_cast<int>(std::llround(p[1] / problem.op.h_t));
      tau = std::clamp(tau, 0, static_cast<int>(grid.rows()) - 1);
      int n_x = static_cast<int>(grid.cols());
      int j = static_cast<int>(std::llround((p[0] + problem.Xi) / problem.op.h_x));
      j = ((j % n_x) + n_x) % n_x;
      return grid(tau, j);
    }
  }
  return 0.0;
}

GroundTruth generate_solution(const ProblemSpec& problem, std::uint64_t seed) {
  GroundTruth gt;
  gt.problem = problem;
  gt.seed = seed;
  auto rng = rng_stream(seed, kStreamInitialCondition);
  std::normal_distribution<double> unit(0.0, 1.0);

  switch (problem.op.kind) {
    case OperatorKind::HarmonicOscillator: {
      gt.y0 = 1.0 + unit(rng);
      gt.v0 = 1.0 + unit(rng);
      return gt;
    }
    case OperatorKind::ContinuousDiffusion: {
      if (problem.j_max < 0) throw config_error("generate_solution: j_max must be >= 0");
      for (int j = 0; j <= problem.j_max; ++j)
        gt.modes.push_back({1.0 + unit(rng), 1.0 + unit(rng)});
      return gt;
    }
    case OperatorKind::EulerBernoulli: {
      const double h = problem.op.h_t;
      const int n_t = steps_of(problem.T, h, "euler rollout");
      double y = unit(rng);  // y_0 ~ N(0, 1)
      gt.grid.resize(n_t + 1, 1);
      gt.grid(0, 0) = y;
      for (int tau = 0; tau < n_t; ++tau) {
        y = y - h * (problem.op.P * y -
                     problem.op.Q * std::pow(y, problem.op.rho));
        if (!std::isfinite(y))
          throw std::runtime_error("generate_solution: rollout blew up at step " +
                                   std::to_string(tau + 1));
        gt.grid(tau + 1, 0) = y;
      }
      return gt;
    }
    case OperatorKind::FdmDiffusion: {
      const double h_t = problem.op.h_t, h_x = problem.op.h_x;
      const int n_t = steps_of(problem.T, h_t, "fdm rollout");
      const int n_x = steps_of(2.0 * problem.Xi, h_x, "fdm rollout");
      Operator op(problem.op);
      // explicit scheme stability: sup c(u) * h_t / h_x^2 <= 1/2
      double c_sup = problem.op.coef == CoefKind::Const ? problem.op.c : problem.op.a;
      if (c_sup * h_t / (h_x * h_x) > 0.5 + 1e-12)
        throw config_error("generate_solution: explicit scheme unstable (c h_t/h_x^2 > 1/2)");
      if (problem.j_max < 0) throw config_error("generate_solution: j_max must be >= 0");
      for (int j = 0; j <= problem.j_max; ++j)
        gt.modes.push_back({1.0 + unit(rng), 1.0 + unit(rng)});

      gt.grid.resize(n_t + 1, n_x);
      for (int j = 0; j < n_x; ++j) {
        double x = -problem.Xi + j * h_x;
        double u = 0.0;
        for (std::size_t m = 0; m < gt.modes.size(); ++m) {
          double wm = m * kPi / problem.Xi;
          u += gt.modes[m][0] * std::cos(wm * x) + gt.modes[m][1] * std::sin(wm * x);
        }
        gt.grid(0, j) = u;
      }
      for (int tau = 0; tau < n_t; ++tau) {
        for (int j = 0; j < n_x; ++j) {
          double u = gt.grid(tau, j);
          double lap = (gt.grid(tau, (j + 1) % n_x) - 2.0 * u +
                        gt.grid(tau, (j + n_x - 1) % n_x)) / (h_x * h_x);
          double next = u + h_t * op.coef_value(u) * lap;
          if (!std::isfinite(next))
            throw std::runtime_error("generate_solution: rollout blew up at step " +
                                     std::to_string(tau + 1));
          gt.grid(tau + 1, j) = next;
        }
      }
      return gt;
    }
  }
  throw config_error("generate_solution: unknown equation");
}

Dataset make_dataset(const GroundTruth& gt, int n, double sigma2,
                     const SplitFractions& fractions, std::uint64_t seed) {
  if (n < 3) throw config_error("make_dataset: need n >= 3");
  if (sigma2 < 0.0) throw config_error("make_dataset: sigma2 must be >= 0");
  if (std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
    throw config_error("make_dataset: split fractions must sum to 1");
  const int n_train = static_cast<int>(std::llround(n * fractions.train));
  const int n_val = static_cast<int>(std::llround(n * fractions.val));
  const int n_test = n - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw config_error("make_dataset: n too small for the split fractions");

  // sample locations
  auto loc_rng = rng_stream(seed, kStreamSampleLocations);
  std::vector<Point> xs(n);
  switch (gt.problem.op.kind) {
    case OperatorKind::HarmonicOscillator: {
      std::uniform_real_distribution<double> ut(0.0, gt.problem.T);
      for (auto& x : xs) x = pt(ut(loc_rng));
      break;
    }
    case OperatorKind::ContinuousDiffusion: {
      std::uniform_real_distribution<double> ux(-gt.problem.Xi, gt.problem.Xi);
      std::uniform_real_distribution<double> ut(0.0, gt.problem.T);
      for (auto& x : xs) {
        double sx = ux(loc_rng);
        x = pt(sx, ut(loc_rng));
      }
      break;
    }
    case OperatorKind::EulerBernoulli: {
      // representable nodes only: the basis has one cell per node tau < n_t
      int n_t = static_cast<int>(gt.grid.rows()) - 1;
      std::uniform_int_distribution<int> utau(0, n_t - 1);
      for (auto& x : xs) x = pt(utau(loc_rng) * gt.problem.op.h_t);
      break;
    }
    case OperatorKind::FdmDiffusion: {
      int n_t = static_cast<int>(gt.grid.rows()) - 1;
      int n_x = static_cast<int>(gt.grid.cols());
      std::uniform_int_distribution<int> utau(0, n_t);
      std::uniform_int_distribution<int> uj(0, n_x - 1);
      for (auto& x : xs) {
        int tau = utau(loc_rng), j = uj(loc_rng);
        x = pt(-gt.problem.Xi + j * gt.problem.op.h_x, tau * gt.problem.op.h_t);
      }
      break;
    }
  }

  // observation noise, one draw per location
  auto noise_rng = rng_stream(seed, kStreamNoise);
  std::normal_distribution<double> eps(0.0, std::sqrt(sigma2));
  Vec noise(n);
  for (int i = 0; i < n; ++i) noise[i] = eps(noise_rng);

  // split by shuffled index
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto shuffle_rng = rng_stream(seed, kStreamSplitShuffle);
  std::shuffle(idx.begin(), idx.end(), shuffle_rng);

  Dataset ds;
  ds.sigma2 = sigma2;
  ds.seed = seed;
  ds.x_train.reserve(n_train);
  ds.x_val.reserve(n_val);
  ds.x_test.reserve(n_test);
  ds.y_train.resize(n_train);
  ds.y_val.resize(n_val);
  ds.y_test.resize(n_test);
  for (int i = 0; i < n_train; ++i) {
    const Point& x = xs[idx[i]];
    ds.x_train.push_back(x);
    ds.y_train[i] = gt.eval(x) + noise[idx[i]];
  }
  for (int i = 0; i < n_val; ++i) {
    const Point& x = xs[idx[n_train + i]];
    ds.x_val.push_back(x);
    ds.y_val[i] = gt.eval(x) + noise[idx[n_train + i]];
  }
  for (int i = 0; i < n_test; ++i) {
    const Point& x = xs[idx[n_train + n_val + i]];
    ds.x_test.push_back(x);
    ds.y_test[i] = gt.eval(x);  // noiseless recovery target
  }
  return ds;
}

double approximation_error(const BasisSet& basis, const GroundTruth& gt,
                           int grid_resolution) {
  std::vector<Point> points;
  if (gt.discrete()) {
    // every representable grid node, exactly
    if (gt.problem.op.kind == OperatorKind::EulerBernoulli) {
      int n_t = static_cast<int>(gt.grid.rows()) - 1;
      for (int tau = 0; tau < n_t; ++tau)
        points.push_back(pt(tau * gt.problem.op.h_t));
    } else {
      int n_t = static_cast<int>(gt.grid.rows()) - 1;
      int n_x = static_cast<int>(gt.grid.cols());
      for (int tau = 0; tau <= n_t; ++tau)
        for (int j = 0; j < n_x; ++j)
          points.push_back(pt(-gt.problem.Xi + j * gt.problem.op.h_x,
                              tau * gt.problem.op.h_t));
    }
  } else if (basis.domain_dim() == 1) {
    if (grid_resolution < 1000)
      throw config_error("approximation_error: grid resolution must be >= 1000");
    for (int i = 0; i < grid_resolution; ++i)
      points.push_back(pt(i * gt.problem.T / grid_resolution));
  } else {
    int per_axis = static_cast<int>(std::ceil(std::sqrt(double(grid_resolution))));
    if (per_axis * per_axis < 1000)
      throw config_error("approximation_error: grid resolution must be >= 1000");
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        points.push_back(pt(-gt.problem.Xi + i * 2.0 * gt.problem.Xi / per_axis,
                            j * gt.problem.T / per_axis));
  }

  const int m = static_cast<int>(points.size());
  Mat A(m, basis.size());
  Vec f(m);
  for (int i = 0; i < m; ++i) {
    A.row(i) = basis.eval(points[i]).transpose();
    f[i] = gt.eval(points[i]);
  }
  // least squares with pseudo-inverse behavior on rank deficiency
  Vec w = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(f);
  Vec r = f - A * w;
  return r.squaredNorm() / m;
}

}  // namespace pireg
