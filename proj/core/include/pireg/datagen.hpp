#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pireg/basis.hpp"
#include "pireg/operators.hpp"
#include "pireg/types.hpp"

namespace pireg {

// Equation plus the domain it lives on. Operator parameters (steps included)
// sit in op; extents and the initial-condition mode count sit here.
struct ProblemSpec {
  OperatorSpec op;
  double T = 1.0;   // time extent
  double Xi = 1.0;  // spatial half extent (diffusion problems)
  int j_max = 1;    // diffusion initial-condition modes j = 0..j_max
};

// A reference solution: closed form for the continuous equations, a rollout
// grid for the discrete ones.
struct GroundTruth {
  ProblemSpec problem;
  std::uint64_t seed = 0;
  // oscillator initial state
  double y0 = 0.0, v0 = 0.0;
  // diffusion modal amplitudes [A_j, B_j], j = 0..j_max
  std::vector<std::array<double, 2>> modes;
  // discrete rollout, (n_t+1) rows; one column for the Euler step, n_x for
  // the FDM stencil
  Mat grid;

  bool discrete() const;
  // Value of the reference solution at a domain point. Discrete solutions
  // snap the point to its grid node.
  double eval(const Point& p) const;
  double at_node(int tau, int j = 0) const { return grid(tau, j); }
};

// Draw initial conditions from the experiment distributions and solve:
// closed forms for the continuous equations, explicit forward rollouts for
// the discrete ones. Throws config_error when the explicit scheme would be
// unstable; throws std::runtime_error if a nonlinear rollout blows up.
GroundTruth generate_solution(const ProblemSpec& problem, std::uint64_t seed);

struct SplitFractions {
  double train = 0.6, val = 0.2, test = 0.2;
};

struct Dataset {
  std::vector<Point> x_train, x_val, x_test;
  Vec y_train, y_val, y_test;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
};

// n observations y = f*(x) + eps, eps ~ N(0, sigma2), locations uniform over
// the domain (continuous) or over representable grid nodes (discrete), split
// by shuffled index. Test targets are noiseless reference evaluations.
Dataset make_dataset(const GroundTruth& gt, int n, double sigma2,
                     const SplitFractions& fractions, std::uint64_t seed);

// Best-in-class error of the basis: least-squares projection of the
// reference solution onto span(basis) over a dense grid, returning the MSE
// of the projection residual.
double approximation_error(const BasisSet& basis, const GroundTruth& gt,
                           int grid_resolution = 4096);

}  // namespace pireg
