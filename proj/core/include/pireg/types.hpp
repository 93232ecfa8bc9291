#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pireg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A point of the (at most 2-D) domain. 1-D problems use x[0] only.
using Point = std::array<double, 2>;

inline Point pt(double a) { return {a, 0.0}; }
inline Point pt(double a, double b) { return {a, b}; }

// Axis-aligned box, used by Lebesgue measures and dense evaluation grids.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  int dim = 1;
};

// Configuration mistakes (bad extents, shape mismatches) throw this; the CLI
// maps it to exit code 1 as opposed to runtime failures.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pireg
