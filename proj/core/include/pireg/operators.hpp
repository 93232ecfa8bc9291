#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pireg/types.hpp"

namespace pireg {

// Every operator acts on a uniform 4-jet of the model function. Continuous
// bases fill the slots with analytic derivatives; grid bases fill them with
// the matching finite differences (forward in t, centered second in x). This
// keeps one chain-rule path for residuals, Jacobians and gradients.
enum JetSlot { kJetU = 0, kJetUt = 1, kJetUx = 2, kJetUxx = 3 };
using Jet4 = Eigen::Vector4d;

enum class OperatorKind {
  HarmonicOscillator,  // f'' + (k_s/m_s) f          (u_xx slot holds f'')
  ContinuousDiffusion, // u_t - c u_xx
  EulerBernoulli,      // u_t + P u - Q u^rho        (forward-difference u_t)
  FdmDiffusion,        // u_t - c(u) u_xx            (grid stencil slots)
};

// Diffusivity law for FdmDiffusion.
enum class CoefKind {
  Const,       // c(u) = c
  Saturating,  // c(u) = a / (1 + u^2)
};

struct OperatorSpec {
  OperatorKind kind = OperatorKind::HarmonicOscillator;
  double m_s = 1.0;  // oscillator mass
  double k_s = 1.0;  // oscillator stiffness
  double c = 1.0;    // diffusivity (ContinuousDiffusion, FdmDiffusion Const)
  double P = 1.0;    // Euler step linear rate
  double Q = 0.0;    // Euler step nonlinear rate
  int rho = 2;       // Euler step nonlinearity exponent
  CoefKind coef = CoefKind::Const;
  double a = 0.1;    // saturating diffusivity amplitude
  double h_t = 0.01; // forward-difference step (Euler step h, FDM time step)
  double h_x = 0.1;  // FDM space step
};

class Operator {
 public:
  explicit Operator(const OperatorSpec& spec);

  const OperatorSpec& spec() const { return spec_; }
  OperatorKind kind() const { return spec_.kind; }

  // True when the residual is a linear functional of the jet. The Euler step
  // counts as linear exactly when Q == 0, and the FDM stencil exactly when
  // the diffusivity law is Const.
  bool linear() const;

  // Diffusivity law c(u) and its derivative (FdmDiffusion only).
  double coef_value(double u) const;
  double coef_derivative(double u) const;

  // Residual value F(jet) and the gradient of F with respect to the jet.
  double apply(const Jet4& jet) const;
  Jet4 partials(const Jet4& jet) const;

  // The linear operator with constant jet gradient equal to partials(0):
  // the linearization of the residual map at the zero coefficient vector.
  Operator linear_part() const;

 private:
  OperatorSpec spec_;
};

Operator make_operator(const OperatorSpec& spec);

class BasisSet;  // basis.hpp

// The 4 x d matrix J with (J w) = jet of the model function w . phi at a
// continuous point: slots filled with analytic derivatives, absent axes zero.
// For 1-D bases the second derivative lands in the u_xx slot.
Mat jet_matrix(const BasisSet& basis, const Point& p);

// Sparse jet functional of one grid residual row: per slot, (column, weight)
// pairs such that slot value = sum of weight * w[column].
struct NodeJet {
  std::array<std::vector<std::pair<int, double>>, 4> slots;
  Jet4 eval(const Vec& w) const;
};

// Stencil at a grid node: forward difference in t, centered second
// difference in x (periodic). Checks operator/basis/step compatibility.
NodeJet node_jet(const Operator& op, const BasisSet& basis, int node);

// Grid nodes that carry a residual row: every node whose forward time
// neighbor exists, in row-major order.
std::vector<int> residual_nodes(const BasisSet& basis);

// Operator applied to the model function w . phi at a continuous point or at
// a grid node index.
double apply(const Operator& op, const BasisSet& basis, const Vec& w,
             const Point& where);
double apply(const Operator& op, const BasisSet& basis, const Vec& w, int node);

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);
std::string to_string(CoefKind kind);
CoefKind coef_kind_from_string(const std::string& name);

}  // namespace pireg
