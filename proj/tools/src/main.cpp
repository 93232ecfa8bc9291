// Command-line front end: run / dim / sweep / approx-error over one
// experiment config. Exit codes: 0 success, 1 configuration error, 2 runtime
// failure.
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "config.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "pireg/types.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int jobs = 1;
  bool quiet = false;
};

pireg::bench::ExperimentConfig load(const GlobalOpts& g) {
  pireg::bench::ExperimentConfig cfg = pireg::bench::load_config(g.config_path);
  if (g.seed_set) cfg.base_seed = g.seed;
  if (!g.out.empty()) cfg.out_path = g.out;
  return cfg;
}

int cmd_run(const GlobalOpts& g) {
  const auto cfg = load(g);
  const auto report = pireg::bench::run_experiment(cfg, g.jobs);
  pireg::bench::write_file(cfg.out_path, pireg::bench::render_csv(report));
  if (!g.quiet) {
    std::cout << pireg::bench::render_summary(report);
    std::cout << "wrote " << cfg.out_path << "\n";
  }
  // A run where no seed of any cell produced a fit is a runtime failure.
  bool any_ok = false;
  for (const auto& row : report.rows)
    if (row.error.empty()) any_ok = true;
  return any_ok ? 0 : 2;
}

int cmd_dim(const GlobalOpts& g) {
  const auto cfg = load(g);
  const auto rows = pireg::bench::run_dim(cfg);
  pireg::bench::write_file(cfg.out_path,
                           pireg::bench::render_dim_csv(cfg, rows));
  if (!g.quiet) {
    for (const auto& r : rows)
      std::cout << cfg.name << "  d = " << r.d << "  d_V = " << r.d_V << "  ("
                << r.method << ")\n";
    std::cout << "wrote " << cfg.out_path << "\n";
  }
  return 0;
}

int cmd_sweep(const GlobalOpts& g) {
  const auto cfg = load(g);
  const auto rows = pireg::bench::run_sweep_trace(cfg, g.jobs);
  pireg::bench::write_file(cfg.out_path,
                           pireg::bench::render_trace_csv(cfg, rows));
  if (!g.quiet) std::cout << "wrote " << cfg.out_path << "\n";
  return 0;
}

int cmd_approx(const GlobalOpts& g) {
  const auto cfg = load(g);
  const auto rows = pireg::bench::run_approx_error(cfg);
  pireg::bench::write_file(cfg.out_path,
                           pireg::bench::render_approx_csv(cfg, rows));
  if (!g.quiet) {
    for (const auto& r : rows)
      if (r.aggregate == "mean")
        std::cout << cfg.name << "  d = " << r.d
                  << "  approx error = " << r.approx_error << "\n";
    std::cout << "wrote " << cfg.out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-informed regression benchmark runner"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", g.config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", g.seed, "override the config base seed")
        ->each([&](const std::string&) { g.seed_set = true; });
    sub->add_option("--out", g.out, "override the config output path");
    sub->add_option("--jobs", g.jobs, "worker thread count")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", g.quiet, "suppress the terminal summary");
  };

  CLI::App* run = app.add_subcommand("run", "tune, fit and report a full experiment");
  CLI::App* dim = app.add_subcommand("dim", "report constraint-variety dimensions");
  CLI::App* sweep = app.add_subcommand("sweep", "trace every hyperparameter candidate");
  CLI::App* approx =
      app.add_subcommand("approx-error", "basis approximation-error diagnostic");
  for (CLI::App* sub : {run, dim, sweep, approx}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(g);
    if (dim->parsed()) return cmd_dim(g);
    if (sweep->parsed()) return cmd_sweep(g);
    return cmd_approx(g);
  } catch (const pireg::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
