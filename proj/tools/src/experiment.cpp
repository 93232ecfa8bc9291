#include "experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>

#include "pireg/rng.hpp"
#include "pireg/solvers.hpp"

#ifndef PIREG_VERSION
#define PIREG_VERSION "0.0.0"
#endif

namespace pireg::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool grid_family(BasisFamily f) {
  return f == BasisFamily::GridIndicator1D || f == BasisFamily::GridIndicator2D;
}

// Dirac collocation points: K uniform draws over the basis domain from the
// trial-point stream of this seed.
TrialSet draw_dirac_trials(const BasisSet& basis, int K, std::uint64_t seed) {
  auto rng = rng_stream(seed, kStreamTrialPoints);
  const Box dom = basis.domain();
  std::uniform_real_distribution<double> u0(dom.lo[0], dom.hi[0]);
  std::uniform_real_distribution<double> u1(dom.lo[1], dom.hi[1]);
  std::vector<Point> points;
  points.reserve(K);
  for (int k = 0; k < K; ++k) {
    double a = u0(rng);
    double b = dom.dim > 1 ? u1(rng) : 0.0;
    points.push_back(dom.dim > 1 ? pt(a, b) : pt(a));
  }
  return make_dirac_trials_at(points);
}

TrialSet build_trials(const ExperimentConfig& cfg, const Cell& cell,
                      const BasisSet& basis, std::uint64_t seed) {
  TrialSet trials;
  switch (cfg.trial_kind) {
    case TrialKind::Dirac:
      trials = draw_dirac_trials(basis, cfg.trial_count, seed);
      break;
    case TrialKind::Weak:
      if (cfg.op_kind == OperatorKind::ContinuousDiffusion) {
        trials = make_weak_diffusion_trials(cfg.Xi, cfg.T, cfg.trial_count,
                                            cfg.trial_count_x,
                                            cfg.quad > 0 ? cfg.quad : 256);
      } else {
        trials = make_weak_oscillator_trials(cfg.T, cfg.trial_count,
                                             cfg.quad > 0 ? cfg.quad : 4096);
      }
      break;
    case TrialKind::Grid:
      trials = make_grid_trials(basis);
      break;
  }
  if (cell.keep >= 0) trials = keep_first(trials, cell.keep);
  return trials;
}

// Per-cell state shared read-only across worker threads. Weak and grid
// trials do not depend on the seed, so their constraint system (and the
// dense penalty kernel, when the dense closed form applies) is built once.
struct SharedCell {
  Cell cell;
  BasisSet basis;
  Operator op;
  bool fixed_trials = false;
  std::optional<ConstraintSystem> cs;
  std::optional<Mat> kernel;  // D^T T D for the dense closed-form path
  DimRow dim;
  explicit SharedCell(const Cell& c) : cell(c), basis(c.basis), op(c.op) {}
};

// True when the closed form should go through the banded Woodbury path
// rather than a precomputed dense kernel.
bool banded_path(const ConstraintSystem& cs) {
  return cs.is_sparse() && cs.gram_is_identity();
}

DimRow cell_dim(const ExperimentConfig& cfg, const Cell& cell,
                const BasisSet& basis, const Operator& op,
                const ConstraintSystem& cs) {
  DimRow row;
  row.experiment = cfg.name;
  row.d = basis.size();
  if (op.linear()) {
    DimReport rep = dim_linear(cs);
    row.method = "rank_nullity";
    row.d_V = rep.d_V;
    row.N = 0;
    row.tol = rep.tol;
  } else {
    std::vector<Vec> points = sample_variety_points(
        cell.problem, basis, cfg.dim_samples, cfg.base_seed);
    DimReport rep = dim_sampled(cs, points);
    row.method = "sampled_jacobian";
    row.d_V = rep.d_V;
    row.N = cfg.dim_samples;
    row.tol = rep.tol;
  }
  return row;
}

// Everything one worker computes for one (cell, seed): the two report rows
// and, when asked, the per-candidate search traces.
struct ItemResult {
  BenchRow rr, pilr;
  std::vector<CandidateRow> trace;
};

ItemResult run_item(const ExperimentConfig& cfg, const SharedCell& sc,
                    int seed_idx, bool want_trace) {
  const std::uint64_t seed_s = cfg.base_seed + static_cast<std::uint64_t>(seed_idx);
  ItemResult out;
  for (BenchRow* row : {&out.rr, &out.pilr}) {
    row->experiment = cfg.name;
    row->seed = static_cast<std::int64_t>(seed_s);
    row->d = sc.basis.size();
    row->d_V = sc.dim.d_V;
    row->n = sc.cell.n;
  }
  out.rr.method = "rr";
  out.pilr.method = "pilr";

  try {
    const GroundTruth gt = generate_solution(sc.cell.problem, seed_s);
    const Dataset ds =
        make_dataset(gt, sc.cell.n, cfg.sigma2, cfg.split, seed_s);

    TrialSet local_trials;
    std::optional<ConstraintSystem> local_cs;
    if (!sc.fixed_trials) {
      local_trials = build_trials(cfg, sc.cell, sc.basis, seed_s);
      local_cs = assemble(sc.op, sc.basis, local_trials);
    }
    const ConstraintSystem& cs = sc.fixed_trials ? *sc.cs : *local_cs;

    const Mat Phi = design_matrix(sc.basis, ds.x_train);
    const Mat Pv = design_matrix(sc.basis, ds.x_val);
    const Mat Pt = design_matrix(sc.basis, ds.x_test);

    const bool closed = sc.op.linear();
    Mat kernel;
    if (closed && !banded_path(cs))
      kernel = sc.fixed_trials ? *sc.kernel
                               : cs.normal_kernel(Vec::Zero(cs.d()));

    OptimizerConfig opt = cfg.optimizer;
    opt.seed = seed_s;

    auto fit_pilr = [&](double xi, double nu) -> FitReport {
      RegressionProblem rp{Phi, ds.y_train, xi, nu};
      if (!closed) return fit_pilr_soft(rp, cs, opt, Pv, ds.y_val);
      if (banded_path(cs)) return fit_pilr_linear(rp, cs);
      return fit_pilr_kernel(rp, kernel);
    };
    auto val_of = [&](const FitReport& f) {
      if (f.diverged || !f.w.allFinite()) return kNaN;
      return mse(Vec(Pv * f.w), ds.y_val);
    };

    std::vector<HyperCandidate> trace_p, trace_r;
    const HyperChoice hp = sweep_hyperparams(
        cfg.search, cfg.search.budget, seed_s,
        [&](double xi, double nu) { return val_of(fit_pilr(xi, nu)); },
        want_trace ? &trace_p : nullptr);
    const HyperChoice hr = sweep_hyperparams(
        cfg.search, cfg.search.budget, seed_s,
        [&](double xi, double nu) {
          (void)nu;
          RegressionProblem rp{Phi, ds.y_train, xi, 0.0};
          return val_of(fit_ridge(rp));
        },
        want_trace ? &trace_r : nullptr);

    const FitReport fp = fit_pilr(hp.xi, hp.nu);
    RegressionProblem rr_prob{Phi, ds.y_train, hr.xi, 0.0};
    const FitReport fr = fit_ridge(rr_prob);

    auto fill = [&](BenchRow& row, const FitReport& f, double xi, double nu) {
      row.xi = xi;
      row.nu = nu;
      row.mse_train = f.mse_train;
      row.mse_val = mse(Vec(Pv * f.w), ds.y_val);
      row.mse_test = mse(Vec(Pt * f.w), ds.y_test);
      row.residual_norm = cs.residual(f.w).norm();
      row.epochs = f.epochs_run;
      row.wall_ms = static_cast<double>(f.wall_ms);
    };
    fill(out.pilr, fp, hp.xi, hp.nu);
    fill(out.rr, fr, hr.xi, 0.0);

    if (want_trace) {
      auto emit = [&](const std::vector<HyperCandidate>& tr,
                      const HyperChoice& choice, const std::string& method) {
        for (size_t i = 0; i < tr.size(); ++i) {
          CandidateRow c;
          c.experiment = cfg.name;
          c.method = method;
          c.seed = static_cast<std::int64_t>(seed_s);
          c.d = sc.basis.size();
          c.n = sc.cell.n;
          c.candidate = static_cast<int>(i);
          c.xi = tr[i].xi;
          c.nu = tr[i].nu;
          c.mse_val = tr[i].val;
          c.selected = static_cast<int>(i) == choice.index;
          out.trace.push_back(std::move(c));
        }
      };
      emit(trace_p, hp, "pilr");
      emit(trace_r, hr, "rr");
    }
  } catch (const std::exception& e) {
    for (BenchRow* row : {&out.rr, &out.pilr}) {
      row->error = e.what();
      row->xi = row->nu = kNaN;
      row->mse_train = row->mse_val = row->mse_test = kNaN;
      row->residual_norm = kNaN;
      row->epochs = row->wall_ms = kNaN;
    }
    out.trace.clear();
  }
  return out;
}

// Mean/std aggregate rows (sample std, n-1; zero for a single row) over the
// successful seeds of one (cell, method).
void append_aggregates(std::vector<BenchRow>& rows,
                       const std::vector<const BenchRow*>& seed_rows) {
  std::vector<const BenchRow*> ok;
  for (const BenchRow* r : seed_rows)
    if (r->error.empty()) ok.push_back(r);
  if (ok.empty()) return;

  auto fields = [](const BenchRow& r) {
    return std::array<double, 8>{r.xi,       r.nu,          r.mse_train,
                                 r.mse_val,  r.mse_test,    r.residual_norm,
                                 r.epochs,   r.wall_ms};
  };
  std::array<double, 8> mean{}, sd{};
  for (const BenchRow* r : ok) {
    auto f = fields(*r);
    for (size_t i = 0; i < f.size(); ++i) mean[i] += f[i];
  }
  for (double& m : mean) m /= ok.size();
  if (ok.size() > 1) {
    for (const BenchRow* r : ok) {
      auto f = fields(*r);
      for (size_t i = 0; i < f.size(); ++i) {
        double dlt = f[i] - mean[i];
        sd[i] += dlt * dlt;
      }
    }
    for (double& s : sd) s = std::sqrt(s / (ok.size() - 1));
  }

  for (int pass = 0; pass < 2; ++pass) {
    BenchRow agg = *ok.front();
    agg.seed = -1;
    agg.aggregate = pass == 0 ? "mean" : "std";
    agg.error.clear();
    const auto& src = pass == 0 ? mean : sd;
    agg.xi = src[0];
    agg.nu = src[1];
    agg.mse_train = src[2];
    agg.mse_val = src[3];
    agg.mse_test = src[4];
    agg.residual_norm = src[5];
    agg.epochs = src[6];
    agg.wall_ms = src[7];
    rows.push_back(std::move(agg));
  }
}

std::vector<SharedCell> prepare_cells(const ExperimentConfig& cfg) {
  std::vector<SharedCell> shared;
  const std::vector<Cell> cells = expand_cells(cfg);
  shared.reserve(cells.size());
  for (const Cell& cell : cells) {
    SharedCell sc(cell);
    sc.fixed_trials = cfg.trial_kind != TrialKind::Dirac;
    // The dimension report needs one assembled system per cell; Dirac cells
    // use the first seed's collocation draw (the rank does not depend on
    // which generic draw it is).
    TrialSet trials = build_trials(cfg, cell, sc.basis, cfg.base_seed);
    ConstraintSystem cs = assemble(sc.op, sc.basis, trials);
    sc.dim = cell_dim(cfg, cell, sc.basis, sc.op, cs);
    if (sc.fixed_trials) {
      if (sc.op.linear() && !banded_path(cs))
        sc.kernel = cs.normal_kernel(Vec::Zero(cs.d()));
      sc.cs = std::move(cs);
    }
    shared.push_back(std::move(sc));
  }
  return shared;
}

// Runs every (cell, seed) item on `jobs` workers and gathers the results in
// config order. Worker scheduling never touches the numbers: every item
// derives all randomness from (base_seed + seed index).
std::vector<ItemResult> run_items(const ExperimentConfig& cfg,
                                  const std::vector<SharedCell>& shared,
                                  int jobs, bool want_trace) {
  struct Item {
    const SharedCell* cell;
    int seed_idx;
  };
  std::vector<Item> items;
  for (const SharedCell& sc : shared)
    for (int s = 0; s < cfg.seeds; ++s) items.push_back({&sc, s});

  std::vector<ItemResult> results(items.size());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  if (jobs == 1) {
    for (size_t i = 0; i < items.size(); ++i)
      results[i] =
          run_item(cfg, *items[i].cell, items[i].seed_idx, want_trace);
    return results;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= items.size()) return;
        results[i] =
            run_item(cfg, *items[i].cell, items[i].seed_idx, want_trace);
      }
    });
  }
  for (std::thread& w : workers) w.join();
  return results;
}

}  // namespace

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> out;
  const bool grid = grid_family(cfg.family);
  const size_t axis = grid ? std::max(cfg.h_t_list.size(), cfg.h_x_list.size())
                           : std::max(cfg.d_t_list.size(), cfg.d_x_list.size());
  auto pick = [](const std::vector<double>& v, size_t i) {
    return v.size() == 1 ? v[0] : v[i];
  };
  auto pick_i = [](const std::vector<int>& v, size_t i) {
    return v.size() == 1 ? v[0] : v[i];
  };
  for (size_t i = 0; i < axis; ++i) {
    OperatorSpec op = cfg.op_base;
    BasisSpec bs;
    bs.family = cfg.family;
    bs.T = cfg.T;
    bs.Xi = cfg.Xi;
    bs.c = cfg.op_base.c;
    bs.omit_fundamental = cfg.omit_fundamental;
    if (grid) {
      op.h_t = pick(cfg.h_t_list, i);
      op.h_x = pick(cfg.h_x_list, i);
      bs.h_t = op.h_t;
      bs.h_x = op.h_x;
    } else {
      bs.d_t = pick_i(cfg.d_t_list, i);
      bs.d_x = pick_i(cfg.d_x_list, i);
    }
    ProblemSpec problem;
    problem.op = op;
    problem.T = cfg.T;
    problem.Xi = cfg.Xi;
    problem.j_max = cfg.j_max;
    std::vector<int> keeps = cfg.keep_list.empty() ? std::vector<int>{-1}
                                                   : cfg.keep_list;
    for (int n : cfg.n_list)
      for (int keep : keeps) out.push_back(Cell{op, bs, problem, n, keep});
  }
  return out;
}

HyperChoice sweep_hyperparams(
    const SearchSpace& box, int budget, std::uint64_t seed,
    const std::function<double(double xi, double nu)>& val_mse,
    std::vector<HyperCandidate>* trace) {
  if (budget < 1) throw config_error("search budget must be >= 1");
  auto rng = rng_stream(seed, kStreamHyperSearch);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double lx = std::log10(box.xi_lo), hx = std::log10(box.xi_hi);
  const double ln = std::log10(box.nu_lo), hn = std::log10(box.nu_hi);
  HyperChoice best;
  best.val = std::numeric_limits<double>::infinity();
  int finite = 0;
  for (int c = 0; c < budget; ++c) {
    const double xi = std::pow(10.0, lx + (hx - lx) * u01(rng));
    const double nu = std::pow(10.0, ln + (hn - ln) * u01(rng));
    const double v = val_mse(xi, nu);
    if (trace) trace->push_back(HyperCandidate{xi, nu, v});
    if (!std::isfinite(v)) continue;
    ++finite;
    const bool better =
        v < best.val ||
        (v == best.val && (nu < best.nu || (nu == best.nu && xi < best.xi)));
    if (best.index < 0 || better) best = HyperChoice{xi, nu, v, c};
  }
  if (finite == 0)
    throw std::runtime_error(
        "hyperparameter search failed: all " + std::to_string(budget) +
        " candidates diverged");
  return best;
}

BenchReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  BenchReport report;
  report.config = cfg;
  report.version = PIREG_VERSION;

  const std::vector<SharedCell> shared = prepare_cells(cfg);
  for (const SharedCell& sc : shared) report.dims.push_back(sc.dim);

  const std::vector<ItemResult> results =
      run_items(cfg, shared, jobs, /*want_trace=*/false);

  // Gather: per cell, the per-seed rows (rr then pilr), then aggregates.
  for (size_t c = 0; c < shared.size(); ++c) {
    std::vector<const BenchRow*> rr_rows, pilr_rows;
    const size_t base = c * cfg.seeds;
    for (int s = 0; s < cfg.seeds; ++s) {
      report.rows.push_back(results[base + s].rr);
      report.rows.push_back(results[base + s].pilr);
    }
    // Pointers into report.rows are unstable across push_back; collect after.
    const size_t first = report.rows.size() - 2 * cfg.seeds;
    for (int s = 0; s < cfg.seeds; ++s) {
      rr_rows.push_back(&report.rows[first + 2 * s]);
      pilr_rows.push_back(&report.rows[first + 2 * s + 1]);
    }
    std::vector<BenchRow> aggs;
    append_aggregates(aggs, rr_rows);
    append_aggregates(aggs, pilr_rows);
    for (BenchRow& a : aggs) report.rows.push_back(std::move(a));
  }
  return report;
}

std::vector<DimRow> run_dim(const ExperimentConfig& cfg) {
  std::vector<DimRow> out;
  for (const Cell& cell : expand_cells(cfg)) {
    BasisSet basis(cell.basis);
    Operator op(cell.op);
    TrialSet trials = build_trials(cfg, cell, basis, cfg.base_seed);
    ConstraintSystem cs = assemble(op, basis, trials);
    out.push_back(cell_dim(cfg, cell, basis, op, cs));
  }
  return out;
}

std::vector<CandidateRow> run_sweep_trace(const ExperimentConfig& cfg,
                                          int jobs) {
  const std::vector<SharedCell> shared = prepare_cells(cfg);
  const std::vector<ItemResult> results =
      run_items(cfg, shared, jobs, /*want_trace=*/true);
  std::vector<CandidateRow> out;
  for (const ItemResult& r : results)
    out.insert(out.end(), r.trace.begin(), r.trace.end());
  return out;
}

std::vector<ApproxRow> run_approx_error(const ExperimentConfig& cfg) {
  std::vector<ApproxRow> out;
  for (const Cell& cell : expand_cells(cfg)) {
    BasisSet basis(cell.basis);
    std::vector<double> errs;
    for (int s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed_s =
          cfg.base_seed + static_cast<std::uint64_t>(s);
      const GroundTruth gt = generate_solution(cell.problem, seed_s);
      ApproxRow row;
      row.experiment = cfg.name;
      row.seed = static_cast<std::int64_t>(seed_s);
      row.d = basis.size();
      row.approx_error = approximation_error(basis, gt, cfg.approx_grid);
      errs.push_back(row.approx_error);
      out.push_back(std::move(row));
    }
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= errs.size();
    double sd = 0.0;
    if (errs.size() > 1) {
      for (double e : errs) sd += (e - mean) * (e - mean);
      sd = std::sqrt(sd / (errs.size() - 1));
    }
    for (int pass = 0; pass < 2; ++pass) {
      ApproxRow agg;
      agg.experiment = cfg.name;
      agg.seed = -1;
      agg.d = basis.size();
      agg.approx_error = pass == 0 ? mean : sd;
      agg.aggregate = pass == 0 ? "mean" : "std";
      out.push_back(std::move(agg));
    }
  }
  return out;
}

}  // namespace pireg::bench
