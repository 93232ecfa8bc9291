#include "pireg/operators.hpp"

#include <cmath>

#include "pireg/basis.hpp"

namespace pireg {

Operator::Operator(const OperatorSpec& spec) : spec_(spec) {
  switch (spec_.kind) {
    case OperatorKind::HarmonicOscillator:
      if (spec_.m_s <= 0.0) throw config_error("oscillator: m_s must be positive");
      break;
    case OperatorKind::ContinuousDiffusion:
      if (spec_.c <= 0.0) throw config_error("diffusion: c must be positive");
      break;
    case OperatorKind::EulerBernoulli:
      if (spec_.rho < 1) throw config_error("euler step: rho must be >= 1");
      if (spec_.h_t <= 0.0) throw config_error("euler step: h must be positive");
      break;
    case OperatorKind::FdmDiffusion:
      if (spec_.coef == CoefKind::Const && spec_.c <= 0.0)
        throw config_error("fdm: c must be positive");
      if (spec_.coef == CoefKind::Saturating && spec_.a <= 0.0)
        throw config_error("fdm: a must be positive");
      if (spec_.h_t <= 0.0 || spec_.h_x <= 0.0)
        throw config_error("fdm: steps must be positive");
      break;
  }
}

bool Operator::linear() const {
  switch (spec_.kind) {
    case OperatorKind::HarmonicOscillator:
    case OperatorKind::ContinuousDiffusion:
      return true;
    case OperatorKind::EulerBernoulli:
      return spec_.Q == 0.0;
    case OperatorKind::FdmDiffusion:
      return spec_.coef == CoefKind::Const;
  }
  return false;
}

double Operator::coef_value(double u) const {
  if (spec_.kind != OperatorKind::FdmDiffusion)
    throw config_error("coef_value: only the FDM stencil has a diffusivity law");
  if (spec_.coef == CoefKind::Const) return spec_.c;
  return spec_.a / (1.0 + u * u);
}

double Operator::coef_derivative(double u) const {
  if (spec_.kind != OperatorKind::FdmDiffusion)
    throw config_error("coef_derivative: only the FDM stencil has a diffusivity law");
  if (spec_.coef == CoefKind::Const) return 0.0;
  double den = 1.0 + u * u;
  return -2.0 * spec_.a * u / (den * den);
}

double Operator::apply(const Jet4& jet) const {
  switch (spec_.kind) {
    case OperatorKind::HarmonicOscillator:
      return jet[kJetUxx] + (spec_.k_s / spec_.m_s) * jet[kJetU];
    case OperatorKind::ContinuousDiffusion:
      return jet[kJetUt] - spec_.c * jet[kJetUxx];
    case OperatorKind::EulerBernoulli:
      return jet[kJetUt] + spec_.P * jet[kJetU] -
             spec_.Q * std::pow(jet[kJetU], spec_.rho);
    case OperatorKind::FdmDiffusion:
      return jet[kJetUt] - coef_value(jet[kJetU]) * jet[kJetUxx];
  }
  return 0.0;
}

Jet4 Operator::partials(const Jet4& jet) const {
  Jet4 g = Jet4::Zero();
  switch (spec_.kind) {
    case OperatorKind::HarmonicOscillator:
      g[kJetU] = spec_.k_s / spec_.m_s;
      g[kJetUxx] = 1.0;
      break;
    case OperatorKind::ContinuousDiffusion:
      g[kJetUt] = 1.0;
      g[kJetUxx] = -spec_.c;
      break;
    case OperatorKind::EulerBernoulli:
      g[kJetU] = spec_.P -
                 spec_.rho * spec_.Q * std::pow(jet[kJetU], spec_.rho - 1);
      g[kJetUt] = 1.0;
      break;
    case OperatorKind::FdmDiffusion:
      g[kJetU] = -coef_derivative(jet[kJetU]) * jet[kJetUxx];
      g[kJetUt] = 1.0;
      g[kJetUxx] = -coef_value(jet[kJetU]);
      break;
  }
  return g;
}

Operator Operator::linear_part() const {
  Jet4 g0 = partials(Jet4::Zero());
  OperatorSpec lin = spec_;
  switch (spec_.kind) {
    case OperatorKind::HarmonicOscillator:
    case OperatorKind::ContinuousDiffusion:
      break;  // already linear
    case OperatorKind::EulerBernoulli:
      lin.P = g0[kJetU];  // P itself unless rho == 1, where Q folds in
      lin.Q = 0.0;
      break;
    case OperatorKind::FdmDiffusion:
      lin.coef = CoefKind::Const;
      lin.c = -g0[kJetUxx];  // c(0): c for Const, a for Saturating
      break;
  }
  return Operator(lin);
}

Operator make_operator(const OperatorSpec& spec) { return Operator(spec); }

Mat jet_matrix(const BasisSet& basis, const Point& p) {
  if (basis.is_grid())
    throw config_error("jet_matrix: indicator grids have no continuous jet");
  Mat out = Mat::Zero(4, basis.size());
  if (basis.domain_dim() == 1) {
    Mat j = basis.eval_jet(p, {{{0, 0}}, {{1, 0}}, {{2, 0}}});
    out.row(kJetU) = j.row(0);
    out.row(kJetUx) = j.row(1);
    out.row(kJetUxx) = j.row(2);
  } else {
    Mat j = basis.eval_jet(p, {{{0, 0}}, {{0, 1}}, {{1, 0}}, {{2, 0}}});
    out.row(kJetU) = j.row(0);
    out.row(kJetUt) = j.row(1);
    out.row(kJetUx) = j.row(2);
    out.row(kJetUxx) = j.row(3);
  }
  return out;
}

Jet4 NodeJet::eval(const Vec& w) const {
  Jet4 jet = Jet4::Zero();
  for (int s = 0; s < 4; ++s)
    for (const auto& [col, weight] : slots[s]) jet[s] += weight * w[col];
  return jet;
}

namespace {

void check_steps(double op_h, double basis_h, const char* what) {
  if (std::abs(op_h - basis_h) > 1e-12 * std::abs(basis_h))
    throw config_error(std::string("node_jet: operator and basis disagree on ") + what);
}

}  // namespace

NodeJet node_jet(const Operator& op, const BasisSet& basis, int node) {
  NodeJet jet;
  if (op.kind() == OperatorKind::EulerBernoulli) {
    if (basis.spec().family != BasisFamily::GridIndicator1D)
      throw config_error("node_jet: euler step needs a 1-D indicator grid");
    check_steps(op.spec().h_t, basis.spec().h_t, "h");
    int n_t = basis.n_t();
    if (node < 0 || node + 1 >= n_t)
      throw std::out_of_range("node_jet: no forward neighbor at this node");
    double inv_h = 1.0 / op.spec().h_t;
    jet.slots[kJetU] = {{node, 1.0}};
    jet.slots[kJetUt] = {{node, -inv_h}, {node + 1, inv_h}};
    return jet;
  }
  if (op.kind() == OperatorKind::FdmDiffusion) {
    if (basis.spec().family != BasisFamily::GridIndicator2D)
      throw config_error("node_jet: fdm stencil needs a 2-D indicator grid");
    check_steps(op.spec().h_t, basis.spec().h_t, "h_t");
    check_steps(op.spec().h_x, basis.spec().h_x, "h_x");
    int n_t = basis.n_t(), n_x = basis.n_x();
    int tau = node / n_x, j = node % n_x;
    if (node < 0 || tau + 1 > n_t)
      throw std::out_of_range("node_jet: no forward neighbor at this node");
    double inv_ht = 1.0 / op.spec().h_t;
    double inv_hx2 = 1.0 / (op.spec().h_x * op.spec().h_x);
    int left = tau * n_x + (j + n_x - 1) % n_x;
    int right = tau * n_x + (j + 1) % n_x;
    jet.slots[kJetU] = {{node, 1.0}};
    jet.slots[kJetUt] = {{node, -inv_ht}, {(tau + 1) * n_x + j, inv_ht}};
    jet.slots[kJetUxx] = {{node, -2.0 * inv_hx2}, {left, inv_hx2}, {right, inv_hx2}};
    // n_x < 3 would alias stencil neighbors; merge duplicate columns
    if (n_x < 3) {
      std::vector<std::pair<int, double>> merged;
      for (const auto& [col, weight] : jet.slots[kJetUxx]) {
        bool found = false;
        for (auto& m : merged)
          if (m.first == col) { m.second += weight; found = true; }
        if (!found) merged.emplace_back(col, weight);
      }
      jet.slots[kJetUxx] = std::move(merged);
    }
    return jet;
  }
  throw config_error("node_jet: continuous operators have no grid stencil");
}

std::vector<int> residual_nodes(const BasisSet& basis) {
  std::vector<int> nodes;
  if (basis.spec().family == BasisFamily::GridIndicator1D) {
    nodes.reserve(basis.n_t() - 1);
    for (int tau = 0; tau + 1 < basis.n_t(); ++tau) nodes.push_back(tau);
  } else if (basis.spec().family == BasisFamily::GridIndicator2D) {
    int n_t = basis.n_t(), n_x = basis.n_x();
    nodes.reserve(static_cast<std::size_t>(n_t) * n_x);
    for (int tau = 0; tau < n_t; ++tau)
      for (int j = 0; j < n_x; ++j) nodes.push_back(tau * n_x + j);
  } else {
    throw config_error("residual_nodes: not a grid family");
  }
  return nodes;
}

double apply(const Operator& op, const BasisSet& basis, const Vec& w,
             const Point& where) {
  if (w.size() != basis.size())
    throw config_error("apply: coefficient length does not match basis size");
  if (op.kind() == OperatorKind::EulerBernoulli ||
      op.kind() == OperatorKind::FdmDiffusion)
    throw config_error("apply: discrete operators take a grid node index");
  Jet4 jet = jet_matrix(basis, where) * w;
  return op.apply(jet);
}

double apply(const Operator& op, const BasisSet& basis, const Vec& w, int node) {
  if (w.size() != basis.size())
    throw config_error("apply: coefficient length does not match basis size");
  return op.apply(node_jet(op, basis, node).eval(w));
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::HarmonicOscillator: return "harmonic_oscillator";
    case OperatorKind::ContinuousDiffusion: return "continuous_diffusion";
    case OperatorKind::EulerBernoulli: return "euler_bernoulli";
    case OperatorKind::FdmDiffusion: return "fdm_diffusion";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& name) {
  if (name == "harmonic_oscillator") return OperatorKind::HarmonicOscillator;
  if (name == "continuous_diffusion") return OperatorKind::ContinuousDiffusion;
  if (name == "euler_bernoulli") return OperatorKind::EulerBernoulli;
  if (name == "fdm_diffusion") return OperatorKind::FdmDiffusion;
  throw config_error("unknown operator kind: " + name);
}

std::string to_string(CoefKind kind) {
  return kind == CoefKind::Const ? "const" : "saturating";
}

CoefKind coef_kind_from_string(const std::string& name) {
  if (name == "const") return CoefKind::Const;
  if (name == "saturating") return CoefKind::Saturating;
  throw config_error("unknown coefficient law: " + name);
}

}  // namespace pireg
