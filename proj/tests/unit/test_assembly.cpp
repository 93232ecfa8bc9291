#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "pireg/assembly.hpp"
#include "pireg/basis.hpp"
#include "pireg/operators.hpp"
#include "pireg/rng.hpp"
#include "pireg/variety.hpp"

using namespace pireg;

namespace {

const double kTwoPi = 2.0 * M_PI;

BasisSpec fourier_spec(int d_t, bool omit = false) {
  BasisSpec s;
  s.family = BasisFamily::Fourier1D;
  s.T = kTwoPi;
  s.d_t = d_t;
  s.omit_fundamental = omit;
  return s;
}

BasisSpec diffusion_spec(int d_x, int d_t, double Xi = M_PI, double c = 1.0) {
  BasisSpec s;
  s.family = BasisFamily::DiffusionTensor;
  s.Xi = Xi;
  s.T = kTwoPi;
  s.c = c;
  s.d_x = d_x;
  s.d_t = d_t;
  return s;
}

BasisSpec grid1_spec(double T, double h_t) {
  BasisSpec s;
  s.family = BasisFamily::GridIndicator1D;
  s.T = T;
  s.h_t = h_t;
  return s;
}

BasisSpec grid2_spec(double T, double h_t, double Xi, double h_x) {
  BasisSpec s;
  s.family = BasisFamily::GridIndicator2D;
  s.T = T;
  s.h_t = h_t;
  s.Xi = Xi;
  s.h_x = h_x;
  return s;
}

OperatorSpec ho_spec(double k_s = 1.0, double m_s = 1.0) {
  OperatorSpec s;
  s.kind = OperatorKind::HarmonicOscillator;
  s.k_s = k_s;
  s.m_s = m_s;
  return s;
}

OperatorSpec cont_diffusion_spec(double c = 1.0) {
  OperatorSpec s;
  s.kind = OperatorKind::ContinuousDiffusion;
  s.c = c;
  return s;
}

OperatorSpec euler_spec(double P, double Q, int rho, double h) {
  OperatorSpec s;
  s.kind = OperatorKind::EulerBernoulli;
  s.P = P;
  s.Q = Q;
  s.rho = rho;
  s.h_t = h;
  return s;
}

OperatorSpec fdm_spec(CoefKind coef, double h_t, double h_x) {
  OperatorSpec s;
  s.kind = OperatorKind::FdmDiffusion;
  s.coef = coef;
  s.h_t = h_t;
  s.h_x = h_x;
  return s;
}

std::vector<Point> uniform_pool(int count, double lo, double hi,
                                std::uint64_t tag) {
  std::mt19937_64 rng = rng_stream(11, kStreamTrialPoints, tag);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<Point> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.push_back(pt(U(rng)));
  return pool;
}

}  // namespace

TEST_CASE("point-mass rows evaluate the operator image exactly") {
  // Oscillator image of {1, cos t, sin t, cos 2t, sin 2t} probed at t = 0.7:
  // the unit-frequency pair is annihilated, the rest follow -3 cos/sin(1.4).
  BasisSet basis = make_basis(fourier_spec(2));
  Operator op = make_operator(ho_spec());
  TrialSet trials = make_dirac_trials_at({pt(0.7)});
  ConstraintSystem cs = assemble(op, basis, trials);
  REQUIRE(cs.K() == 1);
  REQUIRE(cs.linear());
  CHECK(cs.gram_is_identity());
  const double want[5] = {1.0, 0.0, 0.0, -0.50990142870072286,
                          -2.9563491899653807};
  const Mat& D = cs.dense_D();
  for (int j = 0; j < 5; ++j)
    CHECK(D(0, j) == doctest::Approx(want[j]).epsilon(0.0).scale(1e-12));

  // Heat-operator image of the separable basis probed at (x,t) = (0.3, 0.2);
  // the x-frequency-1 pair decays at exactly the equation rate and vanishes.
  BasisSet dbasis = make_basis(diffusion_spec(2, 1));
  Operator dop = make_operator(cont_diffusion_spec());
  ConstraintSystem dcs =
      assemble(dop, dbasis, make_dirac_trials_at({pt(0.3, 0.2)}));
  const double dwant[5] = {0.0, 0.0, 0.0, 2.0271829486112405,
                           1.3868704723875949};
  for (int j = 0; j < 5; ++j)
    CHECK(dcs.dense_D()(0, j) ==
          doctest::Approx(dwant[j]).epsilon(0.0).scale(1e-12));
}

TEST_CASE("volume-measure oscillator pairings match closed-form integrals") {
  // Half-period test functions against the oscillator image of the
  // full-period basis on [0, 2pi]; reference values are exact integrals.
  // The composite trapezoid rule carries an O(h^2) truncation error, so the
  // node count is raised until that error sits well under the tolerance.
  const int quad = 16384;
  BasisSet basis = make_basis(fourier_spec(2));
  Operator op = make_operator(ho_spec());
  TrialSet trials = make_weak_oscillator_trials(kTwoPi, 2, quad);
  REQUIRE(trials.K() == 5);
  ConstraintSystem cs = assemble(op, basis, trials);
  REQUIRE_FALSE(cs.gram_is_identity());

  const double D_want[5][5] = {
      {6.2831853071795862, 0, 0, 0, 0},
      {0, 0, 0, 0, -3.2000000000000002},
      {4, 0, 0, 0.80000000000000004, 0},
      {0, 0, 0, 0, 0},
      {0, 0, 0, 0, 0},
  };
  const Mat& D = cs.dense_D();
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 5; ++j)
      CHECK(D(k, j) == doctest::Approx(D_want[k][j]).epsilon(0.0).scale(1e-6));

  const double T_want[5][5] = {
      {6.2831853071795862, 0, 4, 0, 0},
      {0, 3.1415926535897931, 0, 0, 2.6666666666666665},
      {4, 0, 3.1415926535897931, -1.3333333333333333, 0},
      {0, 0, -1.3333333333333333, 3.1415926535897931, 0},
      {0, 2.6666666666666665, 0, 0, 3.1415926535897931},
  };
  const Mat T = assemble_T(trials);
  for (int k = 0; k < 5; ++k)
    for (int kp = 0; kp < 5; ++kp)
      CHECK(T(k, kp) ==
            doctest::Approx(T_want[k][kp]).epsilon(0.0).scale(1e-6));

  // The Gram is symmetric by construction and positive semidefinite up to
  // quadrature round-off.
  CHECK((T - T.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> eig(T);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("time-slab diffusion pairings match closed-form integrals") {
  // Basis member cos(x) e^{-4t} against the first-slab cos(x) test function
  // on [-pi, pi] x [0, pi]. The x-integrand is periodic over the full box,
  // where the trapezoid rule is spectrally accurate; the t-axis decay sets
  // the real quadrature error, hence the absolute tolerance here.
  const int quad = 1024;
  BasisSet basis = make_basis(diffusion_spec(1, 2));
  Operator op = make_operator(cont_diffusion_spec());
  TrialSet trials = make_weak_diffusion_trials(M_PI, kTwoPi, 2, 1, quad);
  REQUIRE(trials.K() == 4);  // two slabs x (cos, sin)
  ConstraintSystem cs = assemble(op, basis, trials);

  CHECK(cs.dense_D()(0, 3) == doctest::Approx(-2.3561862733354997).epsilon(0.0).scale(5e-4));

  const Mat T = assemble_T(trials);
  CHECK(T(0, 0) == doctest::Approx(9.869604401089358).epsilon(0.0).scale(1e-7));
  // Test functions on disjoint slabs share no support.
  CHECK(T(0, 2) == 0.0);
  CHECK(T(1, 3) == 0.0);
  CHECK((T - T.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pairing a field against point and volume measures") {
  Trial dirac;
  dirac.form = Trial::Form::One;
  dirac.measure.kind = Measure::Kind::Dirac;
  dirac.measure.point = pt(0.5);
  auto square = [](const Point& p) { return p[0] * p[0]; };
  CHECK(pair(square, dirac) == 0.25);

  Trial volume;
  volume.form = Trial::Form::One;
  volume.measure.kind = Measure::Kind::Lebesgue;
  volume.measure.box.dim = 1;
  volume.measure.box.lo = pt(0.0);
  volume.measure.box.hi = pt(kTwoPi);
  volume.measure.quad_nodes = 4096;
  auto one = [](const Point&) { return 1.0; };
  CHECK(pair(one, volume) == doctest::Approx(kTwoPi).epsilon(0.0).scale(1e-10));

  Trial cosine = volume;
  cosine.form = Trial::Form::Cos;
  cosine.freq = 1.0;
  auto cos_field = [](const Point& p) { return std::cos(p[0]); };
  CHECK(pair(cos_field, cosine) == doctest::Approx(M_PI).epsilon(0.0).scale(1e-6));
}

TEST_CASE("grid stencils assemble sparse rows with an implicit identity Gram") {
  // First-order difference plus decay: row tau reads
  // (w_{tau+1} - w_tau)/h + P w_tau.
  const double h = 0.01, P = 1.0;
  BasisSet basis = make_basis(grid1_spec(0.04, h));
  Operator op = make_operator(euler_spec(P, 0.0, 0, h));
  TrialSet trials = make_grid_trials(basis);
  REQUIRE(trials.K() == basis.n_t() - 1);
  ConstraintSystem cs = assemble(op, basis, trials);
  REQUIRE(cs.linear());
  CHECK(cs.is_sparse());
  CHECK(cs.gram_is_identity());

  const Mat D = Mat(cs.sparse_D());
  REQUIRE(D.rows() == 3);
  REQUIRE(D.cols() == 4);
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 4; ++j) {
      double want = 0.0;
      if (j == k) want = P - 1.0 / h;
      if (j == k + 1) want = 1.0 / h;
      CHECK(D(k, j) == doctest::Approx(want).epsilon(0.0).scale(1e-12));
    }
  }
  // dense_D is the same matrix materialized.
  CHECK((cs.dense_D() - D).cwiseAbs().maxCoeff() == 0.0);

  // The scheme's own trajectory sits in the kernel; zero coefficients too.
  Vec roll(4);
  roll << 0.5, 0.49625000000000002, 0.49251882031250005, 0.48880650605118514;
  CHECK(cs.residual(roll).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(cs.residual(Vec::Zero(4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nonlinear grid systems expose the residual map and chain rule") {
  const double h = 0.01, P = 1.0, Q = 0.5;
  BasisSet basis = make_basis(grid1_spec(0.08, h));
  Operator op = make_operator(euler_spec(P, Q, 2, h));
  TrialSet trials = make_grid_trials(basis);
  ConstraintSystem cs = assemble(op, basis, trials);
  REQUIRE_FALSE(cs.linear());
  CHECK(cs.is_sparse());
  CHECK_THROWS_AS(assemble_D(op, basis, trials), config_error);
  CHECK_THROWS_AS(cs.dense_D(), config_error);

  // Residual entries agree with applying the operator node by node.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  Vec w(basis.size());
  for (int j = 0; j < w.size(); ++j) w[j] = N(rng);
  Vec r = cs.residual(w);
  std::vector<int> nodes = residual_nodes(basis);
  REQUIRE(static_cast<int>(nodes.size()) == cs.K());
  for (int k = 0; k < cs.K(); ++k)
    CHECK(r[k] == doctest::Approx(apply(op, basis, w, nodes[k]))
                      .epsilon(0.0)
                      .scale(1e-12));

  // At w = 0 the chain rule reduces to the linearization's constant matrix.
  Mat J0 = cs.residual_jacobian(Vec::Zero(basis.size()));
  ConstraintSystem lin =
      assemble(make_operator(euler_spec(P, 0.0, 0, h)), basis, trials);
  CHECK((J0 - lin.dense_D()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("jacobians match central differences at random coefficients") {
  struct Case {
    BasisSet basis;
    Operator op;
    TrialSet trials;
  };
  std::vector<Case> cases;
  {
    BasisSet b = make_basis(grid1_spec(0.08, 0.01));
    cases.push_back({b, make_operator(euler_spec(1.0, 0.5, 2, 0.01)),
                     make_grid_trials(b)});
  }
  {
    BasisSet b = make_basis(grid2_spec(0.02, 0.01, 1.0, 0.5));
    cases.push_back({b, make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5)),
                     make_grid_trials(b)});
  }
  {
    BasisSet b = make_basis(fourier_spec(2));
    cases.push_back({b, make_operator(ho_spec(2.0, 0.5)),
                     make_dirac_trials_at({pt(0.4), pt(1.9), pt(5.2)})});
  }

  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0.0, 1.0);
  const double step = 1e-6;
  for (const Case& c : cases) {
    ConstraintSystem cs = assemble(c.op, c.basis, c.trials);
    const int d = cs.d();
    for (int rep = 0; rep < 50; ++rep) {
      Vec w(d);
      for (int j = 0; j < d; ++j) w[j] = N(rng);
      Mat J = cs.residual_jacobian(w);
      for (int j = 0; j < d; ++j) {
        Vec wp = w, wm = w;
        wp[j] += step;
        wm[j] -= step;
        Vec fd = (cs.residual(wp) - cs.residual(wm)) / (2.0 * step);
        for (int k = 0; k < cs.K(); ++k)
          CHECK(J(k, j) == doctest::Approx(fd[k])
                               .epsilon(0.0)
                               .scale(1e-5 * std::max(1.0, std::abs(fd[k]))));
      }
    }
  }
}

TEST_CASE("enlarging the trial set never grows the constraint kernel") {
  // Nested trial sets give nested kernels: every extra pairing can only cut
  // the solution set down.
  BasisSet basis = make_basis(fourier_spec(4));
  Operator op = make_operator(ho_spec());
  std::mt19937_64 rng = rng_stream(3, kStreamTrialPoints);
  TrialSet full = make_dirac_trials(uniform_pool(200, 0.0, kTwoPi, 1), 30, rng);

  int prev_kernel = basis.size();
  for (int count : {5, 10, 20, 30}) {
    TrialSet subset = keep_first(full, count);
    Mat D = assemble_D(op, basis, subset);
    int kernel = basis.size() - numeric_rank(D);
    CHECK(kernel <= prev_kernel);
    prev_kernel = kernel;
  }
}

TEST_CASE("a hundred point masses pin the oscillator kernel") {
  // With generic probe points the image of the d = 33 basis has full
  // attainable rank d - 2: only the resonant pair is annihilated.
  BasisSet basis = make_basis(fourier_spec(16));
  Operator op = make_operator(ho_spec());
  std::mt19937_64 rng = rng_stream(3, kStreamTrialPoints, 2);
  TrialSet trials =
      make_dirac_trials(uniform_pool(500, 0.0, kTwoPi, 3), 100, rng);
  Mat D = assemble_D(op, basis, trials);
  CHECK(numeric_rank(D) == 31);
}

TEST_CASE("normal kernel agrees with the assembled factors") {
  // Volume-measure path carries the Gram; point-mass and grid paths do not.
  BasisSet basis = make_basis(fourier_spec(2));
  Operator op = make_operator(ho_spec());
  TrialSet weak = make_weak_oscillator_trials(kTwoPi, 2, 2048);
  ConstraintSystem cs = assemble(op, basis, weak);
  Mat want = cs.dense_D().transpose() * cs.gram() * cs.dense_D();
  Mat got = cs.normal_kernel(Vec::Zero(cs.d()));
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + want.norm()));

  TrialSet dirac = make_dirac_trials_at({pt(0.3), pt(2.2), pt(4.0)});
  ConstraintSystem cd = assemble(op, basis, dirac);
  Mat want_d = cd.dense_D().transpose() * cd.dense_D();
  CHECK((cd.normal_kernel(Vec::Zero(cd.d())) - want_d).cwiseAbs().maxCoeff() <=
        1e-12 * (1.0 + want_d.norm()));

  BasisSet gb = make_basis(grid1_spec(0.04, 0.01));
  Operator ge = make_operator(euler_spec(1.0, 0.0, 0, 0.01));
  ConstraintSystem cg = assemble(ge, gb, make_grid_trials(gb));
  Mat want_g = Mat(cg.sparse_D()).transpose() * Mat(cg.sparse_D());
  CHECK((cg.normal_kernel(Vec::Zero(cg.d())) - want_g).cwiseAbs().maxCoeff() <=
        1e-12 * (1.0 + want_g.norm()));
}

TEST_CASE("ill-formed pairings and trial sets are rejected") {
  BasisSet fourier = make_basis(fourier_spec(2));
  BasisSet grid = make_basis(grid1_spec(0.04, 0.01));
  Operator ho = make_operator(ho_spec());
  Operator euler = make_operator(euler_spec(1.0, 0.0, 0, 0.01));

  // Family mismatch.
  CHECK_THROWS_AS(assemble(ho, grid, make_grid_trials(grid)), config_error);
  // Continuous operator with grid-node trials and vice versa.
  CHECK_THROWS_AS(assemble(ho, fourier, make_grid_trials(grid)), config_error);
  CHECK_THROWS_AS(assemble(euler, grid, make_dirac_trials_at({pt(0.01)})),
                  config_error);
  // Empty or out-of-range trial selections.
  CHECK_THROWS_AS(assemble(ho, fourier, TrialSet{}), config_error);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(make_dirac_trials({}, 4, rng), config_error);
  TrialSet three = make_dirac_trials_at({pt(0.1), pt(0.2), pt(0.3)});
  CHECK_THROWS_AS(keep_first(three, 0), config_error);
  CHECK_THROWS_AS(keep_first(three, 4), config_error);
  // Mixed point and volume measures in one Gram.
  TrialSet mixed = make_weak_oscillator_trials(kTwoPi, 1, 64);
  mixed.pairs.push_back(make_dirac_trials_at({pt(0.5)}).pairs[0]);
  CHECK_THROWS_AS(assemble_T(mixed), config_error);
}
