#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "pireg/assembly.hpp"
#include "pireg/datagen.hpp"
#include "pireg/variety.hpp"

namespace pireg::bench {

// One resolved sweep cell: a fixed operator resolution, basis size, trial
// budget and data size. Cells are enumerated in config order.
struct Cell {
  OperatorSpec op;
  BasisSpec basis;
  ProblemSpec problem;
  int n = 0;
  int keep = -1;  // ablation: keep the first `keep` trial pairs (-1 = all)
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg);

// One fit row of the report CSV. Metric fields are NaN when the seed failed;
// `error` then carries the reason. Aggregate rows hold seed = -1 and
// aggregate = "mean" / "std" (per-seed rows say "false").
struct BenchRow {
  std::string experiment;
  std::string method;  // "rr" | "pilr"
  std::int64_t seed = 0;
  int d = 0;
  int d_V = -1;
  int n = 0;
  double xi = 0.0, nu = 0.0;
  double mse_train = 0.0, mse_val = 0.0, mse_test = 0.0;
  double residual_norm = 0.0;
  double epochs = 0.0;   // double so aggregate rows can carry means
  double wall_ms = 0.0;
  std::string aggregate = "false";
  std::string error;
};

// One dimension-report row.
struct DimRow {
  std::string experiment;
  std::string method;  // "rank_nullity" | "sampled_jacobian"
  int d = 0;
  int d_V = -1;
  int N = 0;  // variety samples consumed (0 for the linear path)
  double tol = 0.0;
};

// One hyperparameter-search candidate (the `sweep` subcommand trace).
struct CandidateRow {
  std::string experiment;
  std::string method;
  std::int64_t seed = 0;
  int d = 0, n = 0;
  int candidate = 0;
  double xi = 0.0, nu = 0.0;
  double mse_val = 0.0;
  bool selected = false;
};

// One basis-approximation-error row (the `approx-error` subcommand).
struct ApproxRow {
  std::string experiment;
  std::int64_t seed = 0;
  int d = 0;
  double approx_error = 0.0;
  std::string aggregate = "false";
};

struct BenchReport {
  ExperimentConfig config;
  std::string version;
  std::vector<BenchRow> rows;
  std::vector<DimRow> dims;
};

// Seeded log-uniform random search over the (xi, nu) box. `val_mse` fits one
// candidate and returns its validation MSE (non-finite marks a diverged
// candidate, which is skipped). Selection is the finite minimum; exact ties
// go to the smaller nu, then the smaller xi. Throws when every candidate
// diverges. The draw sequence per candidate is xi first, then nu.
struct HyperChoice {
  double xi = 0.0, nu = 0.0;
  double val = 0.0;
  int index = -1;
};
struct HyperCandidate {
  double xi = 0.0, nu = 0.0;
  double val = 0.0;
};
HyperChoice sweep_hyperparams(
    const SearchSpace& box, int budget, std::uint64_t seed,
    const std::function<double(double xi, double nu)>& val_mse,
    std::vector<HyperCandidate>* trace = nullptr);

// Full experiment: for every cell and seed, tune both methods on the
// validation split, refit nothing (the winning fit is kept), and record test
// MSE against noiseless targets. Per-seed failures become error rows; cell
// dimension reports are computed once per cell. `jobs` bounds worker
// threads; results are gathered in config order regardless of scheduling.
BenchReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// Dimension reports only (the `dim` subcommand).
std::vector<DimRow> run_dim(const ExperimentConfig& cfg);

// Per-candidate search traces for every cell and seed (the `sweep`
// subcommand).
std::vector<CandidateRow> run_sweep_trace(const ExperimentConfig& cfg,
                                          int jobs = 1);

// Basis approximation errors per cell and seed (the `approx-error`
// subcommand), with mean/std aggregate rows per cell.
std::vector<ApproxRow> run_approx_error(const ExperimentConfig& cfg);

}  // namespace pireg::bench
