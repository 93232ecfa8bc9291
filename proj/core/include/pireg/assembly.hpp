#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pireg/basis.hpp"
#include "pireg/operators.hpp"
#include "pireg/types.hpp"

namespace pireg {

using SpMat = Eigen::SparseMatrix<double>;

// Measure a trial function is paired against: a Dirac point mass recovers
// strong-form collocation, a Lebesgue box recovers weak-form residuals.
struct Measure {
  enum class Kind { Dirac, Lebesgue };
  Kind kind = Kind::Dirac;
  Point point = pt(0.0);  // Dirac location
  Box box;                // Lebesgue support
  int quad_nodes = 4096;  // trapezoid nodes per axis (Lebesgue)
};

// One trial function. Closed forms are tagged rather than type-erased so the
// Gram assembly can detect disjoint supports and reuse quadrature grids.
struct Trial {
  enum class Form {
    One,       // psi = 1
    Cos,       // psi = cos(freq * x)
    Sin,       // psi = sin(freq * x)
    GridNode,  // psi = 1 at one grid node (discrete collocation)
  };
  Form form = Form::One;
  double freq = 0.0;
  int node = -1;  // grid node index for GridNode trials
  Measure measure;

  double eval(const Point& p) const;
};

struct TrialSet {
  std::vector<Trial> pairs;
  int K() const { return static_cast<int>(pairs.size()); }
};

// Strong-form trials: K Dirac points sampled uniformly with replacement from
// the supplied pool of data locations.
TrialSet make_dirac_trials(const std::vector<Point>& pool, int K,
                           std::mt19937_64& rng);
// Strong-form trials at exactly the given points, in order.
TrialSet make_dirac_trials_at(const std::vector<Point>& points);

// Weak oscillator trials on [0, T]: {1} then {cos(k pi/T x), sin(k pi/T x)}
// for k = 1..K_t, all carrying the Lebesgue measure on [0, T].
TrialSet make_weak_oscillator_trials(double T, int K_t, int quad_nodes = 4096);

// Weak diffusion trials: K_t closed time slabs of [0, T], each paired with
// {cos(l pi/Xi x), sin(l pi/Xi x)} for l = 1..K_x over x in [-Xi, Xi].
// Ordering is slab-major, then frequency, cos before sin.
TrialSet make_weak_diffusion_trials(double Xi, double T, int K_t, int K_x,
                                    int quad_nodes = 256);

// Discrete collocation rows: one trial per grid node whose forward time
// neighbor exists, in row-major node order.
TrialSet make_grid_trials(const BasisSet& basis);

// Constraint ablation: keep the first `count` trial pairs, in order.
TrialSet keep_first(const TrialSet& trials, int count);

// Pairing of Eq-style residual fields against one trial:
// Dirac -> field(point) psi(point); Lebesgue -> trapezoid quadrature of
// field * psi over the measure box.
double pair(const std::function<double(const Point&)>& field,
            const Trial& trial);

// Constraint matrix D_{k,j} = <D[phi_j], psi_k>_{mu_k}. Linear operators only.
Mat assemble_D(const Operator& op, const BasisSet& basis,
               const TrialSet& trials);

// Trial Gram matrix T_{k,k'} = <psi_k, psi_k'>. Dirac sets give the diagonal
// psi_k(x_k)^2 convention; Lebesgue entries integrate over box intersections.
Mat assemble_T(const TrialSet& trials);

// The unified residual map p(w) with its Jacobian. Linear systems carry the
// constant matrix D (sparse when the rows are grid stencils); nonlinear
// systems keep per-slot stencil matrices and the operator for chain rules.
class ConstraintSystem {
 public:
  enum class Form { LinearMatrix, NonlinearMap };

  Form form() const { return form_; }
  bool linear() const { return form_ == Form::LinearMatrix; }
  int K() const { return K_; }
  int d() const { return d_; }

  // Linear form access. dense_D materializes the sparse matrix on demand.
  bool is_sparse() const { return sparse_; }
  const Mat& dense_D() const;
  const SpMat& sparse_D() const;

  // Trial Gram. Identity Grams (all Dirac/grid trials) are kept implicit.
  bool gram_is_identity() const { return gram_identity_; }
  const Mat& gram() const;

  Vec residual(const Vec& w) const;
  Mat residual_jacobian(const Vec& w) const;
  SpMat residual_jacobian_sparse(const Vec& w) const;

  // Penalty kernel D^T T D (at w for nonlinear maps: J(w)^T J(w)).
  Mat normal_kernel(const Vec& w) const;

  const Operator& op() const { return *op_; }

 private:
  friend ConstraintSystem assemble(const Operator& op, const BasisSet& basis,
                                   const TrialSet& trials);
  Form form_ = Form::LinearMatrix;
  int K_ = 0, d_ = 0;
  bool sparse_ = false;
  bool gram_identity_ = true;
  mutable std::optional<Mat> dense_D_;
  std::optional<SpMat> sparse_D_;
  std::optional<Mat> gram_;
  std::optional<Operator> op_;
  // nonlinear grid form: per-slot stencil matrices (K x d)
  SpMat slot_u_, slot_ut_, slot_uxx_;
};

// Bind an operator, basis and trial set into the residual system.
ConstraintSystem assemble(const Operator& op, const BasisSet& basis,
                          const TrialSet& trials);

}  // namespace pireg
