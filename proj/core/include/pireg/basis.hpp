#pragma once

#include "pireg/types.hpp"

#include <vector>

namespace pireg {

enum class BasisFamily {
  Fourier1D,       // {1, cos(w_j x), sin(w_j x)}, w_j = 2*pi*j/T, on [0, T]
  DiffusionTensor, // {1, trig(w_j x) * exp(-c w_j'^2 t)}, w_j = j*pi/Xi
  GridIndicator1D, // cells [tau*h_t, (tau+1)*h_t) covering [0, T]
  GridIndicator2D  // cells over [-Xi, Xi] x [0, (n_t+1)*h_t), periodic in x
};

struct BasisSpec {
  BasisFamily family = BasisFamily::Fourier1D;
  double T = 0.0;   // time extent; domain [0, T]
  double Xi = 0.0;  // spatial half extent; domain [-Xi, Xi]
  double c = 1.0;   // decay coefficient of the DiffusionTensor exponentials
  int d_t = 1;      // Fourier1D frequency count / DiffusionTensor decay count
  int d_x = 1;      // DiffusionTensor spatial frequency count
  double h_t = 0.0; // grid steps (indicator families)
  double h_x = 0.0;
  // Fourier1D only: drop the j=1 pair and append the j=d_t+1 pair, keeping
  // the member count fixed.
  bool omit_fundamental = false;
};

// A multi-index of partial-derivative orders per domain axis; total <= 2.
// Axis 0 is x (or the only axis in 1-D), axis 1 is t.
using DerivOrder = std::array<int, 2>;

// A finite evaluable basis family. Immutable after construction; safe to
// share across threads.
class BasisSet {
 public:
  explicit BasisSet(const BasisSpec& spec);

  const BasisSpec& spec() const { return spec_; }
  int size() const { return d_; }
  int domain_dim() const { return dim_; }
  Box domain() const;
  bool is_grid() const;

  // Row of order-0 values phi_j(p), j = 0..d-1.
  Vec eval(const Point& p) const;

  // Partial derivatives at p: result(o, j) is the orders[o] derivative of
  // phi_j. Indicator families accept only order-0 rows.
  Mat eval_jet(const Point& p, const std::vector<DerivOrder>& orders) const;

  // Grid plumbing (indicator families only).
  int n_t() const { return n_t_; }
  int n_x() const { return n_x_; }
  int cell_index(const Point& p) const;  // indicator that is 1 at p
  Point cell_node(int j) const;          // representative node of cell j

  // Fourier1D frequency index of pair slot s (0-based), after any
  // omit-fundamental renumbering.
  int fourier_index(int s) const { return freq_.at(s); }

 private:
  BasisSpec spec_;
  int d_ = 0;
  int dim_ = 1;
  int n_t_ = 0, n_x_ = 0;
  std::vector<int> freq_;

  void check_domain(const Point& p) const;
  double deriv_1d(int j, double x, int order) const;
};

BasisSet make_basis(const BasisSpec& spec);

}  // namespace pireg
