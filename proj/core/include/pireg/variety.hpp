#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pireg/assembly.hpp"
#include "pireg/datagen.hpp"
#include "pireg/types.hpp"

namespace pireg {

// How many directions of the coefficient space the constraints leave free.
struct DimReport {
  enum class Method { RankNullity, SampledJacobian };
  Method method = Method::RankNullity;
  int d = 0;
  int d_V = 0;
  int N = 0;                      // samples used (SampledJacobian)
  std::vector<int> sample_ranks;  // Jacobian rank at each sample
  double tol = 1e-8;
};

// Count of singular values above rel_tol * sigma_max; 0 for a zero matrix.
int numeric_rank(const Mat& A, double rel_tol = 1e-8);

// Rank-nullity: d_V = d - rank(D) for linear constraint matrices.
DimReport dim_linear(const Mat& D, double rel_tol = 1e-8);
DimReport dim_linear(const ConstraintSystem& cs, double rel_tol = 1e-8);

// Points on the solution variety: simulate with random initial conditions
// drawn from the experiment distributions and least-squares project each
// solution onto the basis over a dense grid. Throws if a projection leaves a
// residual above 1e-6 * (1 + |w|) — the basis cannot represent solutions.
std::vector<Vec> sample_variety_points(const ProblemSpec& problem,
                                       const BasisSet& basis, int N,
                                       std::uint64_t seed);

// Sampled tangent dimension: d_V = max over samples of
// d - rank(residual Jacobian at the sample).
DimReport dim_sampled(const ConstraintSystem& cs, const std::vector<Vec>& points,
                      double rel_tol = 1e-8);

// Effective-dimension upper bound: with alpha the eigenvalues of D^T T D and
// d_V the count of (numerically) zero ones, returns
// d_V/(1+xi) + sum over positive alpha of 1/(1+xi+nu*alpha).
double effective_dim_bound(const Mat& D, const Mat& T, double xi, double nu,
                           double rel_tol = 1e-8);

// Exact integer rho*(2*rho-1)^(d+1) as a decimal string (the bound on the
// sum of Betti numbers of the constraint variety).
std::string beta_upper_bound(int rho, int d);

}  // namespace pireg
