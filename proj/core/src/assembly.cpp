#include "pireg/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace pireg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Composite trapezoid grid over a box, tensor-product weights.
struct QuadGrid {
  std::vector<Point> nodes;
  std::vector<double> weights;
};

QuadGrid make_quad(const Box& box, int q) {
  if (q < 2) throw config_error("quadrature needs at least 2 nodes per axis");
  QuadGrid grid;
  if (box.dim == 1) {
    double h = (box.hi[0] - box.lo[0]) / (q - 1);
    grid.nodes.reserve(q);
    grid.weights.reserve(q);
    for (int i = 0; i < q; ++i) {
      grid.nodes.push_back(pt(box.lo[0] + i * h));
      grid.weights.push_back(h * ((i == 0 || i == q - 1) ? 0.5 : 1.0));
    }
  } else {
    double hx = (box.hi[0] - box.lo[0]) / (q - 1);
    double ht = (box.hi[1] - box.lo[1]) / (q - 1);
    grid.nodes.reserve(static_cast<std::size_t>(q) * q);
    grid.weights.reserve(static_cast<std::size_t>(q) * q);
    for (int i = 0; i < q; ++i) {
      double wx = hx * ((i == 0 || i == q - 1) ? 0.5 : 1.0);
      for (int j = 0; j < q; ++j) {
        double wt = ht * ((j == 0 || j == q - 1) ? 0.5 : 1.0);
        grid.nodes.push_back(pt(box.lo[0] + i * hx, box.lo[1] + j * ht));
        grid.weights.push_back(wx * wt);
      }
    }
  }
  return grid;
}

bool same_box(const Box& a, const Box& b) {
  return a.dim == b.dim && a.lo == b.lo && a.hi == b.hi;
}

// Closed intersection of two boxes; empty() when any axis has no overlap.
struct BoxOverlap {
  Box box;
  bool empty = true;
};

BoxOverlap intersect(const Box& a, const Box& b) {
  BoxOverlap out;
  if (a.dim != b.dim) throw config_error("intersect: mixed box dimensions");
  out.box.dim = a.dim;
  for (int ax = 0; ax < a.dim; ++ax) {
    out.box.lo[ax] = std::max(a.lo[ax], b.lo[ax]);
    out.box.hi[ax] = std::min(a.hi[ax], b.hi[ax]);
    if (out.box.hi[ax] <= out.box.lo[ax]) return out;  // zero measure
  }
  out.empty = false;
  return out;
}

}  // namespace

double Trial::eval(const Point& p) const {
  switch (form) {
    case Form::One: return 1.0;
    case Form::Cos: return std::cos(freq * p[0]);
    case Form::Sin: return std::sin(freq * p[0]);
    case Form::GridNode: return 1.0;
  }
  return 0.0;
}

TrialSet make_dirac_trials(const std::vector<Point>& pool, int K,
                           std::mt19937_64& rng) {
  if (pool.empty()) throw config_error("make_dirac_trials: empty point pool");
  if (K < 1) throw config_error("make_dirac_trials: K must be >= 1");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  TrialSet out;
  out.pairs.reserve(K);
  for (int k = 0; k < K; ++k) {
    Trial t;
    t.form = Trial::Form::One;
    t.measure.kind = Measure::Kind::Dirac;
    t.measure.point = pool[pick(rng)];
    out.pairs.push_back(t);
  }
  return out;
}

TrialSet make_dirac_trials_at(const std::vector<Point>& points) {
  if (points.empty()) throw config_error("make_dirac_trials_at: empty point list");
  TrialSet out;
  out.pairs.reserve(points.size());
  for (const auto& p : points) {
    Trial t;
    t.form = Trial::Form::One;
    t.measure.kind = Measure::Kind::Dirac;
    t.measure.point = p;
    out.pairs.push_back(t);
  }
  return out;
}

TrialSet make_weak_oscillator_trials(double T, int K_t, int quad_nodes) {
  if (T <= 0.0) throw config_error("weak trials: T must be positive");
  if (K_t < 1) throw config_error("weak trials: K_t must be >= 1");
  Measure lebesgue;
  lebesgue.kind = Measure::Kind::Lebesgue;
  lebesgue.box.dim = 1;
  lebesgue.box.lo = pt(0.0);
  lebesgue.box.hi = pt(T);
  lebesgue.quad_nodes = quad_nodes;

  TrialSet out;
  out.pairs.reserve(2 * K_t + 1);
  Trial one;
  one.form = Trial::Form::One;
  one.measure = lebesgue;
  out.pairs.push_back(one);
  for (int k = 1; k <= K_t; ++k) {
    double w = k * kPi / T;
    Trial c;
    c.form = Trial::Form::Cos;
    c.freq = w;
    c.measure = lebesgue;
    out.pairs.push_back(c);
    Trial s = c;
    s.form = Trial::Form::Sin;
    out.pairs.push_back(s);
  }
  return out;
}

TrialSet make_weak_diffusion_trials(double Xi, double T, int K_t, int K_x,
                                    int quad_nodes) {
  if (Xi <= 0.0 || T <= 0.0) throw config_error("weak trials: extents must be positive");
  if (K_t < 1 || K_x < 1) throw config_error("weak trials: counts must be >= 1");
  TrialSet out;
  out.pairs.reserve(static_cast<std::size_t>(K_t) * 2 * K_x);
  for (int i = 0; i < K_t; ++i) {
    Measure slab;
    slab.kind = Measure::Kind::Lebesgue;
    slab.box.dim = 2;
    slab.box.lo = pt(-Xi, i * T / K_t);
    slab.box.hi = pt(Xi, (i + 1) * T / K_t);
    slab.quad_nodes = quad_nodes;
    for (int l = 1; l <= K_x; ++l) {
      double w = l * kPi / Xi;
      Trial c;
      c.form = Trial::Form::Cos;
      c.freq = w;
      c.measure = slab;
      out.pairs.push_back(c);
      Trial s = c;
      s.form = Trial::Form::Sin;
      out.pairs.push_back(s);
    }
  }
  return out;
}

TrialSet make_grid_trials(const BasisSet& basis) {
  TrialSet out;
  for (int node : residual_nodes(basis)) {
    Trial t;
    t.form = Trial::Form::GridNode;
    t.node = node;
    t.measure.kind = Measure::Kind::Dirac;
    t.measure.point = basis.cell_node(node);
    out.pairs.push_back(t);
  }
  return out;
}

TrialSet keep_first(const TrialSet& trials, int count) {
  if (count < 1 || count > trials.K())
    throw config_error("keep_first: count out of range");
  TrialSet out;
  out.pairs.assign(trials.pairs.begin(), trials.pairs.begin() + count);
  return out;
}

double pair(const std::function<double(const Point&)>& field,
            const Trial& trial) {
  if (trial.measure.kind == Measure::Kind::Dirac) {
    double v = field(trial.measure.point);
    if (!std::isfinite(v)) throw std::runtime_error("pair: non-finite field value");
    return v * trial.eval(trial.measure.point);
  }
  QuadGrid grid = make_quad(trial.measure.box, trial.measure.quad_nodes);
  double acc = 0.0;
  for (std::size_t q = 0; q < grid.nodes.size(); ++q) {
    double v = field(grid.nodes[q]);
    if (!std::isfinite(v)) throw std::runtime_error("pair: non-finite field value");
    acc += grid.weights[q] * v * trial.eval(grid.nodes[q]);
  }
  return acc;
}

namespace {

// Rows of D for continuous bases. Lebesgue rows share one quadrature field
// table per distinct box (trial sets order slab-major, so a one-slot cache
// suffices).
Mat assemble_dense_D(const Operator& op, const BasisSet& basis,
                     const TrialSet& trials) {
  const int K = trials.K(), d = basis.size();
  const Jet4 g = op.partials(Jet4::Zero());
  Mat D(K, d);
  bool cached = false;
  Box cached_box;
  int cached_q = 0;
  QuadGrid grid;
  Mat field;  // nodes x d table of the operator applied to each basis member
  for (int k = 0; k < K; ++k) {
    const Trial& trial = trials.pairs[k];
    if (trial.measure.kind == Measure::Kind::Dirac) {
      D.row(k) = g.transpose() * jet_matrix(basis, trial.measure.point);
      continue;
    }
    if (!cached || cached_q != trial.measure.quad_nodes ||
        !same_box(cached_box, trial.measure.box)) {
      grid = make_quad(trial.measure.box, trial.measure.quad_nodes);
      field.resize(static_cast<Eigen::Index>(grid.nodes.size()), d);
      for (std::size_t q = 0; q < grid.nodes.size(); ++q)
        field.row(q) = g.transpose() * jet_matrix(basis, grid.nodes[q]);
      cached = true;
      cached_box = trial.measure.box;
      cached_q = trial.measure.quad_nodes;
    }
    Vec s(grid.nodes.size());
    for (std::size_t q = 0; q < grid.nodes.size(); ++q)
      s[q] = grid.weights[q] * trial.eval(grid.nodes[q]);
    D.row(k) = s.transpose() * field;
  }
  return D;
}

void check_pairing(const Operator& op, const BasisSet& basis,
                   const TrialSet& trials) {
  if (trials.K() < 1) throw config_error("assemble: empty trial set");
  BasisFamily fam = basis.spec().family;
  OperatorKind kind = op.kind();
  bool ok = (kind == OperatorKind::HarmonicOscillator && fam == BasisFamily::Fourier1D) ||
            (kind == OperatorKind::ContinuousDiffusion && fam == BasisFamily::DiffusionTensor) ||
            (kind == OperatorKind::EulerBernoulli && fam == BasisFamily::GridIndicator1D) ||
            (kind == OperatorKind::FdmDiffusion && fam == BasisFamily::GridIndicator2D);
  if (!ok) throw config_error("assemble: operator and basis family do not match");
  bool grid = basis.is_grid();
  for (const Trial& t : trials.pairs) {
    bool is_node = t.form == Trial::Form::GridNode;
    if (grid && !is_node)
      throw config_error("assemble: grid operators take grid-node trials");
    if (!grid && is_node)
      throw config_error("assemble: continuous operators take point or weak trials");
  }
}

}  // namespace

Mat assemble_D(const Operator& op, const BasisSet& basis,
               const TrialSet& trials) {
  if (!op.linear())
    throw config_error("assemble_D: nonlinear operator has no constant matrix");
  ConstraintSystem cs = assemble(op, basis, trials);
  return cs.dense_D();
}

Mat assemble_T(const TrialSet& trials) {
  const int K = trials.K();
  if (K < 1) throw config_error("assemble_T: empty trial set");
  bool any_dirac = false, any_lebesgue = false;
  for (const Trial& t : trials.pairs)
    (t.measure.kind == Measure::Kind::Dirac ? any_dirac : any_lebesgue) = true;
  if (any_dirac && any_lebesgue)
    throw config_error("assemble_T: mixed-measure trial set");

  Mat T = Mat::Zero(K, K);
  if (any_dirac) {
    // Distinct point masses share no support: diagonal psi_k(x_k)^2.
    for (int k = 0; k < K; ++k) {
      double v = trials.pairs[k].eval(trials.pairs[k].measure.point);
      T(k, k) = v * v;
    }
    return T;
  }
  for (int k = 0; k < K; ++k) {
    for (int kp = k; kp < K; ++kp) {
      const Trial& a = trials.pairs[k];
      const Trial& b = trials.pairs[kp];
      BoxOverlap overlap = intersect(a.measure.box, b.measure.box);
      double v = 0.0;
      if (!overlap.empty) {
        QuadGrid grid = make_quad(
            overlap.box, std::max(a.measure.quad_nodes, b.measure.quad_nodes));
        for (std::size_t q = 0; q < grid.nodes.size(); ++q)
          v += grid.weights[q] * a.eval(grid.nodes[q]) * b.eval(grid.nodes[q]);
      }
      T(k, kp) = v;
      T(kp, k) = v;
    }
  }
  return T;
}

const Mat& ConstraintSystem::dense_D() const {
  if (form_ != Form::LinearMatrix)
    throw config_error("dense_D: nonlinear system has no constant matrix");
  if (!dense_D_) dense_D_ = Mat(*sparse_D_);
  return *dense_D_;
}

const SpMat& ConstraintSystem::sparse_D() const {
  if (form_ != Form::LinearMatrix || !sparse_D_)
    throw config_error("sparse_D: no sparse constraint matrix held");
  return *sparse_D_;
}

const Mat& ConstraintSystem::gram() const {
  if (!gram_) throw config_error("gram: identity Gram is kept implicit");
  return *gram_;
}

Vec ConstraintSystem::residual(const Vec& w) const {
  if (w.size() != d_) throw config_error("residual: dimension mismatch");
  if (form_ == Form::LinearMatrix)
    return sparse_ ? Vec(*sparse_D_ * w) : Vec(*dense_D_ * w);
  Vec u = slot_u_ * w, ut = slot_ut_ * w, uxx = slot_uxx_ * w;
  Vec p(K_);
  for (int k = 0; k < K_; ++k)
    p[k] = op_->apply(Jet4(u[k], ut[k], 0.0, uxx[k]));
  return p;
}

Mat ConstraintSystem::residual_jacobian(const Vec& w) const {
  if (w.size() != d_) throw config_error("residual_jacobian: dimension mismatch");
  if (form_ == Form::LinearMatrix) return dense_D();
  return Mat(residual_jacobian_sparse(w));
}

SpMat ConstraintSystem::residual_jacobian_sparse(const Vec& w) const {
  if (w.size() != d_) throw config_error("residual_jacobian: dimension mismatch");
  if (form_ == Form::LinearMatrix) {
    if (sparse_) return *sparse_D_;
    return dense_D_->sparseView();
  }
  Vec u = slot_u_ * w, ut = slot_ut_ * w, uxx = slot_uxx_ * w;
  Vec gu(K_), gut(K_), guxx(K_);
  for (int k = 0; k < K_; ++k) {
    Jet4 g = op_->partials(Jet4(u[k], ut[k], 0.0, uxx[k]));
    gu[k] = g[kJetU];
    gut[k] = g[kJetUt];
    guxx[k] = g[kJetUxx];
  }
  SpMat J = gu.asDiagonal() * slot_u_;
  J += SpMat(gut.asDiagonal() * slot_ut_);
  J += SpMat(guxx.asDiagonal() * slot_uxx_);
  return J;
}

Mat ConstraintSystem::normal_kernel(const Vec& w) const {
  if (form_ == Form::LinearMatrix) {
    if (sparse_) {
      SpMat DtD = sparse_D_->transpose() * (*sparse_D_);
      return Mat(DtD);
    }
    const Mat& D = dense_D();
    if (gram_identity_) return D.transpose() * D;
    return D.transpose() * (*gram_) * D;
  }
  Mat J = residual_jacobian(w);
  return J.transpose() * J;
}

ConstraintSystem assemble(const Operator& op, const BasisSet& basis,
                          const TrialSet& trials) {
  check_pairing(op, basis, trials);
  ConstraintSystem cs;
  cs.K_ = trials.K();
  cs.d_ = basis.size();
  cs.op_ = op;

  if (basis.is_grid()) {
    // Stencil rows: build the per-slot matrices once, then either collapse
    // them with the constant partials (linear) or keep them for chain rules.
    std::vector<Eigen::Triplet<double>> tu, tut, tuxx;
    for (int k = 0; k < cs.K_; ++k) {
      NodeJet jet = node_jet(op, basis, trials.pairs[k].node);
      for (const auto& [col, wgt] : jet.slots[kJetU]) tu.emplace_back(k, col, wgt);
      for (const auto& [col, wgt] : jet.slots[kJetUt]) tut.emplace_back(k, col, wgt);
      for (const auto& [col, wgt] : jet.slots[kJetUxx]) tuxx.emplace_back(k, col, wgt);
    }
    cs.slot_u_.resize(cs.K_, cs.d_);
    cs.slot_ut_.resize(cs.K_, cs.d_);
    cs.slot_uxx_.resize(cs.K_, cs.d_);
    cs.slot_u_.setFromTriplets(tu.begin(), tu.end());
    cs.slot_ut_.setFromTriplets(tut.begin(), tut.end());
    cs.slot_uxx_.setFromTriplets(tuxx.begin(), tuxx.end());
    cs.sparse_ = true;
    cs.gram_identity_ = true;
    if (op.linear()) {
      Jet4 g = op.partials(Jet4::Zero());
      SpMat D = g[kJetU] * cs.slot_u_;
      D += SpMat(g[kJetUt] * cs.slot_ut_);
      D += SpMat(g[kJetUxx] * cs.slot_uxx_);
      D.makeCompressed();
      cs.sparse_D_ = std::move(D);
      cs.form_ = ConstraintSystem::Form::LinearMatrix;
    } else {
      cs.form_ = ConstraintSystem::Form::NonlinearMap;
    }
    return cs;
  }

  // Continuous operators are linear functionals of the jet.
  cs.form_ = ConstraintSystem::Form::LinearMatrix;
  cs.sparse_ = false;
  cs.dense_D_ = assemble_dense_D(op, basis, trials);
  bool any_lebesgue = false;
  for (const Trial& t : trials.pairs)
    if (t.measure.kind == Measure::Kind::Lebesgue) any_lebesgue = true;
  cs.gram_identity_ = !any_lebesgue;
  if (any_lebesgue) cs.gram_ = assemble_T(trials);
  return cs;
}

}  // namespace pireg
