#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pireg/basis.hpp"
#include "pireg/datagen.hpp"
#include "pireg/operators.hpp"
#include "pireg/solvers.hpp"
#include "pireg/types.hpp"

namespace pireg::bench {

// Sectioned key = value text with # / ; comments. Keys live under the
// [section] that precedes them; values keep internal whitespace. Lookups
// that fail to parse report file:line so config mistakes are one-glance
// fixable. Every key must be consumed by the experiment builder; leftovers
// are typos and rejected.
class IniDoc {
 public:
  static IniDoc parse_file(const std::string& path);
  static IniDoc parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;

  // Typed getters; the *_or forms fall back to a default when absent.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;
  std::vector<int> get_ints(const std::string& section,
                            const std::string& key) const;

  // Keys read so far are marked; check_consumed throws on any leftover.
  void check_consumed() const;

  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  std::string origin_;
  std::string text_;
  std::map<std::string, Entry> entries_;  // "section.key"

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;
};

enum class TrialKind { Dirac, Weak, Grid };

struct SearchSpace {
  double xi_lo = 1e-9, xi_hi = 1e-2;
  double nu_lo = 1e-9, nu_hi = 1e-2;
  int budget = 100;
};

// One experiment file, resolved and validated. List-valued keys describe the
// sweep axes; expand_cells() in the experiment runner crosses them.
struct ExperimentConfig {
  std::string name;
  int seeds = 10;
  std::uint64_t base_seed = 1;
  int dim_samples = 10;  // variety sample count for nonlinear dimensions

  // Operator. Grid families read per-cell steps from h_t/h_x (zipped lists,
  // singletons broadcast); continuous families ignore them.
  OperatorKind op_kind = OperatorKind::HarmonicOscillator;
  OperatorSpec op_base;
  std::vector<double> h_t_list, h_x_list;

  // Domain extents and the ground-truth mode count for diffusion.
  double T = 1.0;
  double Xi = 1.0;
  int j_max = 1;

  // Basis. d_t/d_x are sweep axes for the spectral families.
  BasisFamily family = BasisFamily::Fourier1D;
  std::vector<int> d_t_list, d_x_list;
  bool omit_fundamental = false;

  // Trials. Dirac collocation points are drawn uniformly over the basis
  // domain from their own seeded stream, one draw per seed.
  TrialKind trial_kind = TrialKind::Dirac;
  int trial_count = 100;    // Dirac K / weak time count K_t
  int trial_count_x = 0;    // weak diffusion spatial frequency count K_x
  int quad = 0;             // weak-form quadrature nodes (0 = factory default)
  std::vector<int> keep_list;  // ablation ladder; empty = keep every trial

  // Data.
  std::vector<int> n_list;
  double sigma2 = 0.01;
  SplitFractions split;

  SearchSpace search;
  OptimizerConfig optimizer;

  int approx_grid = 4096;  // dense grid for the approximation-error diagnostic
  std::string out_path;
  std::string source_text;  // raw file contents, echoed into report headers
  std::string origin;       // path the config was parsed from
};

// Parses and validates one experiment file. Unknown sections or keys, bad
// enum values, inconsistent list lengths and unsatisfiable ranges all throw
// config_error with file:line context.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_config_text(const std::string& text,
                                  const std::string& origin);

}  // namespace pireg::bench
