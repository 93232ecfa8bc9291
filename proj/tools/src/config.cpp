#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pireg::bench {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();  // trailing comma
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw config_error(where + ": expected a number, got '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw config_error(where + ": expected an integer, got '" + s + "'");
  return v;
}

}  // namespace

IniDoc IniDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

IniDoc IniDoc::parse_text(const std::string& text, const std::string& origin) {
  IniDoc doc;
  doc.origin_ = origin;
  doc.text_ = text;
  std::string section;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = raw;
    size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(origin + ":" + std::to_string(line_no) +
                           ": unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw config_error(origin + ":" + std::to_string(line_no) +
                           ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(origin + ":" + std::to_string(line_no) +
                         ": expected 'key = value', got '" + line + "'");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error(origin + ":" + std::to_string(line_no) +
                         ": empty key");
    if (section.empty())
      throw config_error(origin + ":" + std::to_string(line_no) +
                         ": key '" + key + "' appears before any [section]");
    std::string full = section + "." + key;
    if (doc.entries_.count(full))
      throw config_error(origin + ":" + std::to_string(line_no) +
                         ": duplicate key '" + full + "'");
    doc.entries_[full] = Entry{value, line_no, false};
  }
  return doc;
}

const IniDoc::Entry* IniDoc::find(const std::string& section,
                                  const std::string& key) const {
  auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) return nullptr;
  it->second.consumed = true;
  return &it->second;
}

const IniDoc::Entry& IniDoc::require(const std::string& section,
                                     const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw config_error(origin_ + ": missing required key '" + section + "." +
                       key + "'");
  return *e;
}

void IniDoc::fail(const Entry& e, const std::string& what) const {
  throw config_error(origin_ + ":" + std::to_string(e.line) + ": " + what);
}

bool IniDoc::has(const std::string& section, const std::string& key) const {
  return entries_.count(section + "." + key) > 0;
}

std::string IniDoc::get_string(const std::string& section,
                               const std::string& key) const {
  return require(section, key).value;
}

std::string IniDoc::get_string_or(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double IniDoc::get_double(const std::string& section,
                          const std::string& key) const {
  const Entry& e = require(section, key);
  return parse_double(e.value, origin_ + ":" + std::to_string(e.line));
}

double IniDoc::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return parse_double(e->value, origin_ + ":" + std::to_string(e->line));
}

std::int64_t IniDoc::get_int(const std::string& section,
                             const std::string& key) const {
  const Entry& e = require(section, key);
  return parse_int(e.value, origin_ + ":" + std::to_string(e.line));
}

std::int64_t IniDoc::get_int_or(const std::string& section,
                                const std::string& key,
                                std::int64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return parse_int(e->value, origin_ + ":" + std::to_string(e->line));
}

bool IniDoc::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::string v = lower(e->value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(*e, "expected a boolean, got '" + e->value + "'");
}

std::vector<double> IniDoc::get_doubles(const std::string& section,
                                        const std::string& key) const {
  const Entry& e = require(section, key);
  std::string where = origin_ + ":" + std::to_string(e.line);
  std::vector<double> out;
  for (const std::string& item : split_list(e.value))
    out.push_back(parse_double(item, where));
  if (out.empty()) fail(e, "empty list");
  return out;
}

std::vector<int> IniDoc::get_ints(const std::string& section,
                                  const std::string& key) const {
  const Entry& e = require(section, key);
  std::string where = origin_ + ":" + std::to_string(e.line);
  std::vector<int> out;
  for (const std::string& item : split_list(e.value))
    out.push_back(static_cast<int>(parse_int(item, where)));
  if (out.empty()) fail(e, "empty list");
  return out;
}

void IniDoc::check_consumed() const {
  for (const auto& [full, e] : entries_)
    if (!e.consumed)
      throw config_error(origin_ + ":" + std::to_string(e.line) +
                         ": unknown key '" + full + "'");
}

namespace {

OperatorKind parse_operator_kind(const std::string& v, const IniDoc& doc) {
  std::string k = lower(v);
  if (k == "harmonic_oscillator") return OperatorKind::HarmonicOscillator;
  if (k == "continuous_diffusion") return OperatorKind::ContinuousDiffusion;
  if (k == "euler_bernoulli") return OperatorKind::EulerBernoulli;
  if (k == "fdm_diffusion") return OperatorKind::FdmDiffusion;
  throw config_error(doc.origin() + ": unknown operator kind '" + v +
                     "' (harmonic_oscillator | continuous_diffusion | "
                     "euler_bernoulli | fdm_diffusion)");
}

BasisFamily parse_family(const std::string& v, const IniDoc& doc) {
  std::string k = lower(v);
  if (k == "fourier") return BasisFamily::Fourier1D;
  if (k == "diffusion_tensor") return BasisFamily::DiffusionTensor;
  if (k == "grid_1d") return BasisFamily::GridIndicator1D;
  if (k == "grid_2d") return BasisFamily::GridIndicator2D;
  throw config_error(doc.origin() + ": unknown basis family '" + v +
                     "' (fourier | diffusion_tensor | grid_1d | grid_2d)");
}

TrialKind parse_trial_kind(const std::string& v, const IniDoc& doc) {
  std::string k = lower(v);
  if (k == "dirac") return TrialKind::Dirac;
  if (k == "weak") return TrialKind::Weak;
  if (k == "grid") return TrialKind::Grid;
  throw config_error(doc.origin() + ": unknown trial kind '" + v +
                     "' (dirac | weak | grid)");
}

bool grid_family(BasisFamily f) {
  return f == BasisFamily::GridIndicator1D || f == BasisFamily::GridIndicator2D;
}

ExperimentConfig build(const IniDoc& doc) {
  ExperimentConfig cfg;
  cfg.origin = doc.origin();
  cfg.source_text = doc.text();

  cfg.name = doc.get_string("experiment", "name");
  cfg.seeds = static_cast<int>(doc.get_int_or("experiment", "seeds", 10));
  cfg.base_seed =
      static_cast<std::uint64_t>(doc.get_int_or("experiment", "base_seed", 1));
  cfg.dim_samples =
      static_cast<int>(doc.get_int_or("experiment", "dim_samples", 10));
  if (cfg.seeds < 1) throw config_error(doc.origin() + ": seeds must be >= 1");
  if (cfg.dim_samples < 1)
    throw config_error(doc.origin() + ": dim_samples must be >= 1");

  cfg.op_kind = parse_operator_kind(doc.get_string("operator", "kind"), doc);
  cfg.op_base.kind = cfg.op_kind;
  cfg.op_base.m_s = doc.get_double_or("operator", "mass", 1.0);
  cfg.op_base.k_s = doc.get_double_or("operator", "stiffness", 1.0);
  cfg.op_base.c = doc.get_double_or("operator", "c", 1.0);
  cfg.op_base.P = doc.get_double_or("operator", "p", 1.0);
  cfg.op_base.Q = doc.get_double_or("operator", "q", 0.0);
  cfg.op_base.rho = static_cast<int>(doc.get_int_or("operator", "rho", 2));
  std::string coef = lower(doc.get_string_or("operator", "coef", "const"));
  if (coef == "const") {
    cfg.op_base.coef = CoefKind::Const;
  } else if (coef == "saturating") {
    cfg.op_base.coef = CoefKind::Saturating;
  } else {
    throw config_error(doc.origin() + ": unknown coef '" + coef +
                       "' (const | saturating)");
  }
  cfg.op_base.a = doc.get_double_or("operator", "amplitude", 0.1);
  cfg.h_t_list = doc.has("operator", "h_t") ? doc.get_doubles("operator", "h_t")
                                            : std::vector<double>{0.01};
  cfg.h_x_list = doc.has("operator", "h_x") ? doc.get_doubles("operator", "h_x")
                                            : std::vector<double>{0.1};

  cfg.T = doc.get_double_or("domain", "t", 1.0);
  cfg.Xi = doc.get_double_or("domain", "xi", 1.0);
  cfg.j_max = static_cast<int>(doc.get_int_or("domain", "j_max", 1));
  if (!(cfg.T > 0.0)) throw config_error(doc.origin() + ": domain T must be positive");
  if (!(cfg.Xi > 0.0)) throw config_error(doc.origin() + ": domain Xi must be positive");

  cfg.family = parse_family(doc.get_string("basis", "family"), doc);
  cfg.d_t_list = doc.has("basis", "d_t") ? doc.get_ints("basis", "d_t")
                                         : std::vector<int>{1};
  cfg.d_x_list = doc.has("basis", "d_x") ? doc.get_ints("basis", "d_x")
                                         : std::vector<int>{1};
  cfg.omit_fundamental = doc.get_bool_or("basis", "omit_fundamental", false);

  cfg.trial_kind = parse_trial_kind(doc.get_string("trials", "kind"), doc);
  cfg.trial_count = static_cast<int>(doc.get_int_or("trials", "count", 100));
  cfg.trial_count_x = static_cast<int>(doc.get_int_or("trials", "count_x", 0));
  cfg.quad = static_cast<int>(doc.get_int_or("trials", "quad", 0));
  if (doc.has("trials", "keep")) cfg.keep_list = doc.get_ints("trials", "keep");
  if (cfg.trial_count < 1)
    throw config_error(doc.origin() + ": trials count must be >= 1");

  cfg.n_list = doc.get_ints("data", "n");
  cfg.sigma2 = doc.get_double_or("data", "sigma2", 0.01);
  if (doc.has("data", "split")) {
    std::vector<double> fr = doc.get_doubles("data", "split");
    if (fr.size() != 3)
      throw config_error(doc.origin() +
                         ": split needs exactly three fractions");
    cfg.split.train = fr[0];
    cfg.split.val = fr[1];
    cfg.split.test = fr[2];
  }
  for (int n : cfg.n_list)
    if (n < 3) throw config_error(doc.origin() + ": data n must be >= 3");
  if (!(cfg.sigma2 >= 0.0))
    throw config_error(doc.origin() + ": sigma2 must be nonnegative");

  if (doc.has("search", "xi")) {
    std::vector<double> r = doc.get_doubles("search", "xi");
    if (r.size() != 2)
      throw config_error(doc.origin() + ": search xi needs 'low, high'");
    cfg.search.xi_lo = r[0];
    cfg.search.xi_hi = r[1];
  }
  if (doc.has("search", "nu")) {
    std::vector<double> r = doc.get_doubles("search", "nu");
    if (r.size() != 2)
      throw config_error(doc.origin() + ": search nu needs 'low, high'");
    cfg.search.nu_lo = r[0];
    cfg.search.nu_hi = r[1];
  }
  cfg.search.budget = static_cast<int>(doc.get_int_or("search", "budget", 100));
  if (cfg.search.budget < 1)
    throw config_error(doc.origin() + ": search budget must be >= 1");
  if (!(cfg.search.xi_lo > 0.0 && cfg.search.xi_lo < cfg.search.xi_hi) ||
      !(cfg.search.nu_lo > 0.0 && cfg.search.nu_lo < cfg.search.nu_hi))
    throw config_error(doc.origin() +
                       ": search bounds must be positive with low < high");

  cfg.optimizer.learning_rate =
      doc.get_double_or("optimizer", "learning_rate", 1e-2);
  cfg.optimizer.max_epochs =
      static_cast<int>(doc.get_int_or("optimizer", "max_epochs", 2000));
  cfg.optimizer.patience =
      static_cast<int>(doc.get_int_or("optimizer", "patience", 100));
  cfg.optimizer.decay = doc.get_double_or("optimizer", "decay", 0.999);

  cfg.approx_grid =
      static_cast<int>(doc.get_int_or("experiment", "approx_grid", 4096));
  if (cfg.approx_grid < 1000)
    throw config_error(doc.origin() + ": approx_grid must be >= 1000");
  cfg.out_path = doc.get_string_or("output", "path", cfg.name + ".csv");

  // Cross-field shape checks: sweep axes must zip.
  auto ziplen = [&](size_t a, size_t b, const char* what) {
    if (a != b && a != 1 && b != 1)
      throw config_error(doc.origin() + std::string(": ") + what +
                         " lists must have equal length (or one singleton)");
  };
  if (grid_family(cfg.family)) {
    ziplen(cfg.h_t_list.size(), cfg.h_x_list.size(), "h_t/h_x");
  } else {
    ziplen(cfg.d_t_list.size(), cfg.d_x_list.size(), "d_t/d_x");
  }
  if (cfg.family == BasisFamily::GridIndicator2D &&
      cfg.op_kind != OperatorKind::FdmDiffusion)
    throw config_error(doc.origin() +
                       ": grid_2d basis pairs with the fdm_diffusion operator");
  if (grid_family(cfg.family) != (cfg.trial_kind == TrialKind::Grid))
    throw config_error(doc.origin() +
                       ": grid indicator bases take grid trials; continuous "
                       "bases take dirac or weak trials");
  if (cfg.trial_kind == TrialKind::Weak &&
      cfg.op_kind == OperatorKind::ContinuousDiffusion && cfg.trial_count_x < 1)
    throw config_error(doc.origin() +
                       ": weak diffusion trials need count_x >= 1");

  doc.check_consumed();
  return cfg;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  return build(IniDoc::parse_file(path));
}

ExperimentConfig load_config_text(const std::string& text,
                                  const std::string& origin) {
  return build(IniDoc::parse_text(text, origin));
}

}  // namespace pireg::bench
