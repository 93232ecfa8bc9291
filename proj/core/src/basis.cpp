#include "pireg/basis.hpp"

#include <cmath>

namespace pireg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cell lookup with a snap epsilon so grid nodes computed as tau*h always land
// in their own cell despite rounding (cells are >= 1e-3 wide in practice).
int snap_floor(double q) { return static_cast<int>(std::floor(q + 1e-9)); }

int checked_cells(double extent, double step, const char* what) {
  if (extent <= 0.0) throw config_error(std::string(what) + ": extent must be positive");
  if (step <= 0.0) throw config_error(std::string(what) + ": step must be positive");
  double cells = extent / step;
  int n = static_cast<int>(std::llround(cells));
  if (n < 1 || std::abs(n * step - extent) > 1e-9 * extent)
    throw config_error(std::string(what) + ": step does not divide extent");
  return n;
}

}  // namespace

BasisSet::BasisSet(const BasisSpec& spec) : spec_(spec) {
  switch (spec_.family) {
    case BasisFamily::Fourier1D: {
      if (spec_.T <= 0.0) throw config_error("Fourier1D: T must be positive");
      if (spec_.d_t < 1) throw config_error("Fourier1D: d_t must be >= 1");
      dim_ = 1;
      d_ = 2 * spec_.d_t + 1;
      freq_.resize(spec_.d_t);
      for (int s = 0; s < spec_.d_t; ++s)
        freq_[s] = spec_.omit_fundamental ? s + 2 : s + 1;
      break;
    }
    case BasisFamily::DiffusionTensor: {
      if (spec_.T <= 0.0 || spec_.Xi <= 0.0)
        throw config_error("DiffusionTensor: extents must be positive");
      if (spec_.d_t < 1 || spec_.d_x < 1)
        throw config_error("DiffusionTensor: counts must be >= 1");
      if (spec_.omit_fundamental)
        throw config_error("DiffusionTensor: omit-fundamental not supported");
      dim_ = 2;
      d_ = 2 * spec_.d_x * spec_.d_t + 1;
      break;
    }
    case BasisFamily::GridIndicator1D: {
      dim_ = 1;
      n_t_ = checked_cells(spec_.T, spec_.h_t, "GridIndicator1D");
      d_ = n_t_;
      break;
    }
    case BasisFamily::GridIndicator2D: {
      dim_ = 2;
      n_t_ = checked_cells(spec_.T, spec_.h_t, "GridIndicator2D");
      n_x_ = checked_cells(2.0 * spec_.Xi, spec_.h_x, "GridIndicator2D");
      // One extra time row: coefficients cover every node of the reference
      // grid, whose rollout has n_t + 1 time levels.
      d_ = (n_t_ + 1) * n_x_;
      break;
    }
  }
}

Box BasisSet::domain() const {
  Box b;
  b.dim = dim_;
  switch (spec_.family) {
    case BasisFamily::Fourier1D:
    case BasisFamily::GridIndicator1D:
      b.lo = pt(0.0);
      b.hi = pt(spec_.T);
      break;
    case BasisFamily::DiffusionTensor:
    case BasisFamily::GridIndicator2D:
      b.lo = pt(-spec_.Xi, 0.0);
      b.hi = pt(spec_.Xi, spec_.T);
      break;
  }
  return b;
}

bool BasisSet::is_grid() const {
  return spec_.family == BasisFamily::GridIndicator1D ||
         spec_.family == BasisFamily::GridIndicator2D;
}

int BasisSet::cell_index(const Point& p) const {
  if (spec_.family == BasisFamily::GridIndicator1D) {
    if (p[0] < -1e-9 || p[0] > spec_.T * (1.0 + 1e-9))
      throw std::out_of_range("GridIndicator1D: point outside [0, T]");
    int tau = snap_floor(p[0] / spec_.h_t);
    if (tau >= n_t_) tau = n_t_ - 1;  // final cell is closed on the right
    if (tau < 0) tau = 0;
    return tau;
  }
  if (spec_.family == BasisFamily::GridIndicator2D) {
    double x = p[0], t = p[1];
    if (x < -spec_.Xi * (1.0 + 1e-9) || x > spec_.Xi * (1.0 + 1e-9) ||
        t < -1e-9 || t > spec_.T * (1.0 + 1e-9))
      throw std::out_of_range("GridIndicator2D: point outside domain");
    int j = snap_floor((x + spec_.Xi) / spec_.h_x);
    j = ((j % n_x_) + n_x_) % n_x_;  // periodic wrap, x = Xi aliases -Xi
    int tau = snap_floor(t / spec_.h_t);
    if (tau < 0) tau = 0;
    if (tau > n_t_) tau = n_t_;  // the extra row holds the t = T nodes
    return tau * n_x_ + j;
  }
  throw config_error("cell_index: not a grid family");
}

Point BasisSet::cell_node(int j) const {
  if (spec_.family == BasisFamily::GridIndicator1D) return pt(j * spec_.h_t);
  if (spec_.family == BasisFamily::GridIndicator2D) {
    int tau = j / n_x_;
    int jx = j % n_x_;
    return pt(-spec_.Xi + jx * spec_.h_x, tau * spec_.h_t);
  }
  throw config_error("cell_node: not a grid family");
}

// Derivative of order `order` of the 1-D Fourier member j at x.
double BasisSet::deriv_1d(int j, double x, int order) const {
  if (j == 0) return order == 0 ? 1.0 : 0.0;
  int s = (j - 1) / 2;           // pair slot
  bool is_sin = ((j - 1) % 2) == 1;
  double w = 2.0 * kPi * freq_[s] / spec_.T;
  double arg = w * x;
  double body;
  switch (order) {
    case 0: body = is_sin ? std::sin(arg) : std::cos(arg); break;
    case 1: body = is_sin ? w * std::cos(arg) : -w * std::sin(arg); break;
    case 2: body = -w * w * (is_sin ? std::sin(arg) : std::cos(arg)); break;
    default: throw config_error("Fourier1D: derivative order must be <= 2");
  }
  return body;
}

void BasisSet::check_domain(const Point& p) const {
  Box b = domain();
  for (int ax = 0; ax < dim_; ++ax) {
    double slack = 1e-9 * (std::abs(b.hi[ax] - b.lo[ax]) + 1.0);
    if (p[ax] < b.lo[ax] - slack || p[ax] > b.hi[ax] + slack)
      throw std::out_of_range("basis evaluation outside the closed domain");
  }
}

Vec BasisSet::eval(const Point& p) const {
  check_domain(p);
  Vec out = Vec::Zero(d_);
  switch (spec_.family) {
    case BasisFamily::Fourier1D: {
      for (int j = 0; j < d_; ++j) out[j] = deriv_1d(j, p[0], 0);
      break;
    }
    case BasisFamily::DiffusionTensor: {
      out[0] = 1.0;
      double x = p[0], t = p[1];
      int idx = 1;
      for (int j = 1; j <= spec_.d_x; ++j) {
        double wx = j * kPi / spec_.Xi;
        for (int jp = 1; jp <= spec_.d_t; ++jp) {
          double wt = jp * kPi / spec_.Xi;
          double decay = std::exp(-spec_.c * wt * wt * t);
          out[idx++] = std::cos(wx * x) * decay;
          out[idx++] = std::sin(wx * x) * decay;
        }
      }
      break;
    }
    case BasisFamily::GridIndicator1D:
    case BasisFamily::GridIndicator2D:
      out[cell_index(p)] = 1.0;
      break;
  }
  return out;
}

Mat BasisSet::eval_jet(const Point& p, const std::vector<DerivOrder>& orders) const {
  check_domain(p);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(orders.size()), d_);
  for (std::size_t o = 0; o < orders.size(); ++o) {
    const auto& mi = orders[o];
    int total = mi[0] + mi[1];
    if (total > 2) throw config_error("eval_jet: total derivative order must be <= 2");
    switch (spec_.family) {
      case BasisFamily::Fourier1D: {
        if (mi[1] != 0) throw config_error("Fourier1D: no second axis");
        for (int j = 0; j < d_; ++j) out(o, j) = deriv_1d(j, p[0], mi[0]);
        break;
      }
      case BasisFamily::DiffusionTensor: {
        double x = p[0], t = p[1];
        if (total == 0 || mi[0] == 0) {
          // pure time derivatives: each member is scaled by (-c w_t^2)^b
          out(o, 0) = total == 0 ? 1.0 : 0.0;
          int idx = 1;
          for (int j = 1; j <= spec_.d_x; ++j) {
            double wx = j * kPi / spec_.Xi;
            for (int jp = 1; jp <= spec_.d_t; ++jp) {
              double wt = jp * kPi / spec_.Xi;
              double lam = -spec_.c * wt * wt;
              double scale = std::pow(lam, mi[1]) * std::exp(lam * t);
              out(o, idx++) = std::cos(wx * x) * scale;
              out(o, idx++) = std::sin(wx * x) * scale;
            }
          }
        } else {
          // mixed/spatial: differentiate the trig part, scale by the decay
          out(o, 0) = 0.0;
          int idx = 1;
          for (int j = 1; j <= spec_.d_x; ++j) {
            double wx = j * kPi / spec_.Xi;
            for (int jp = 1; jp <= spec_.d_t; ++jp) {
              double wt = jp * kPi / spec_.Xi;
              double lam = -spec_.c * wt * wt;
              double scale = std::pow(lam, mi[1]) * std::exp(lam * t);
              double arg = wx * x;
              double dc, ds;  // mi[0]-th derivative of cos, sin parts
              if (mi[0] == 1) {
                dc = -wx * std::sin(arg);
                ds = wx * std::cos(arg);
              } else {
                dc = -wx * wx * std::cos(arg);
                ds = -wx * wx * std::sin(arg);
              }
              out(o, idx++) = dc * scale;
              out(o, idx++) = ds * scale;
            }
          }
        }
        break;
      }
      case BasisFamily::GridIndicator1D:
      case BasisFamily::GridIndicator2D: {
        if (total > 0)
          throw config_error("indicator families support only order-0 jets");
        out(o, cell_index(p)) = 1.0;
        break;
      }
    }
  }
  return out;
}

BasisSet make_basis(const BasisSpec& spec) { return BasisSet(spec); }

}  // namespace pireg
