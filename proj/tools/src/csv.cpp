#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef PIREG_VERSION
#define PIREG_VERSION "0.0.0"
#endif

namespace pireg::bench {

namespace {

// Fields are quoted only when they contain a comma, quote or newline (error
// messages can); everything the emitter writes itself is quote-free.
std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void preamble(std::ostringstream& os, const ExperimentConfig& cfg,
              const std::string& version) {
  os << "# pireg " << version << "\n";
  os << "# experiment: " << cfg.name << "\n";
  os << "# hyperparameters: seeded log-uniform random search over the"
        " configured box (the original study used an adaptive tuner);"
        " selection is the minimum validation MSE, ties to smaller nu"
        " then xi\n";
  os << "# wall_ms is measured wall time, the one nondeterministic column\n";
  os << "# config (" << cfg.origin << "):\n";
  std::stringstream src(cfg.source_text);
  std::string line;
  while (std::getline(src, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    os << "#   " << line << "\n";
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string render_csv(const BenchReport& report) {
  std::ostringstream os;
  preamble(os, report.config, report.version);
  os << "experiment,method,seed,d,d_V,n,xi,nu,mse_train,mse_val,mse_test,"
        "residual_norm,epochs,wall_ms,aggregate,error\n";
  for (const BenchRow& r : report.rows) {
    os << escape(r.experiment) << ',' << r.method << ',' << r.seed << ','
       << r.d << ',' << r.d_V << ',' << r.n << ',' << format_double(r.xi)
       << ',' << format_double(r.nu) << ',' << format_double(r.mse_train)
       << ',' << format_double(r.mse_val) << ',' << format_double(r.mse_test)
       << ',' << format_double(r.residual_norm) << ','
       << format_double(r.epochs) << ',' << format_double(r.wall_ms) << ','
       << r.aggregate << ',' << escape(r.error) << "\n";
  }
  return os.str();
}

std::string render_dim_csv(const ExperimentConfig& cfg,
                           const std::vector<DimRow>& rows) {
  std::ostringstream os;
  preamble(os, cfg, PIREG_VERSION);
  os << "experiment,method,d,d_V,N,tol\n";
  for (const DimRow& r : rows)
    os << escape(r.experiment) << ',' << r.method << ',' << r.d << ','
       << r.d_V << ',' << r.N << ',' << format_double(r.tol) << "\n";
  return os.str();
}

std::string render_trace_csv(const ExperimentConfig& cfg,
                             const std::vector<CandidateRow>& rows) {
  std::ostringstream os;
  preamble(os, cfg, PIREG_VERSION);
  os << "experiment,method,seed,d,n,candidate,xi,nu,mse_val,selected\n";
  for (const CandidateRow& r : rows)
    os << escape(r.experiment) << ',' << r.method << ',' << r.seed << ','
       << r.d << ',' << r.n << ',' << r.candidate << ','
       << format_double(r.xi) << ',' << format_double(r.nu) << ','
       << format_double(r.mse_val) << ',' << (r.selected ? "true" : "false")
       << "\n";
  return os.str();
}

std::string render_approx_csv(const ExperimentConfig& cfg,
                              const std::vector<ApproxRow>& rows) {
  std::ostringstream os;
  preamble(os, cfg, PIREG_VERSION);
  os << "experiment,seed,d,approx_error,aggregate\n";
  for (const ApproxRow& r : rows)
    os << escape(r.experiment) << ',' << r.seed << ',' << r.d << ','
       << format_double(r.approx_error) << ',' << r.aggregate << "\n";
  return os.str();
}

std::string render_summary(const BenchReport& report) {
  std::ostringstream os;
  os << report.config.name << " (" << report.version << ")\n";
  for (const DimRow& dim : report.dims)
    os << "  d = " << dim.d << "  d_V = " << dim.d_V << "  (" << dim.method
       << ")\n";
  char buf[160];
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const BenchRow& r = report.rows[i];
    if (r.aggregate != "mean") continue;
    // The matching std row follows its mean row.
    const BenchRow* sd =
        i + 1 < report.rows.size() && report.rows[i + 1].aggregate == "std"
            ? &report.rows[i + 1]
            : nullptr;
    std::snprintf(buf, sizeof(buf),
                  "  d=%-6d d_V=%-5d n=%-5d %-5s test MSE %.4g +- %.4g\n",
                  r.d, r.d_V, r.n, r.method.c_str(), r.mse_test,
                  sd ? sd->mse_test : 0.0);
    os << buf;
  }
  int failed = 0;
  for (const BenchRow& r : report.rows)
    if (!r.error.empty()) ++failed;
  if (failed > 0) os << "  " << failed << " per-seed failures (see CSV)\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (out.header.empty())
      out.header = std::move(fields);
    else
      out.rows.push_back(std::move(fields));
  }
  return out;
}

}  // namespace pireg::bench
