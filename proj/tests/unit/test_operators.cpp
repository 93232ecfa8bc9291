#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "pireg/basis.hpp"
#include "pireg/operators.hpp"
#include "pireg/rng.hpp"

using namespace pireg;

namespace {

OperatorSpec ho_spec(double k_s = 1.0, double m_s = 1.0) {
  OperatorSpec s;
  s.kind = OperatorKind::HarmonicOscillator;
  s.k_s = k_s;
  s.m_s = m_s;
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

}  // namespace

TEST_CASE("linearity flags follow the coefficient structure") {
  CHECK(make_operator(ho_spec()).linear());
  OperatorSpec diff;
  diff.kind = OperatorKind::ContinuousDiffusion;
  CHECK(make_operator(diff).linear());
  CHECK(make_operator(euler_spec(1.0, 0.0, 0, 0.01)).linear());
  CHECK_FALSE(make_operator(euler_spec(1.0, 0.5, 2, 0.01)).linear());
  CHECK(make_operator(fdm_spec(CoefKind::Const, 0.01, 0.5)).linear());
  CHECK_FALSE(make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5)).linear());
}

TEST_CASE("residual values on hand jets") {
  // Slot order (u, u_t, u_x, u_xx); the oscillator reads f'' from u_xx.
  Jet4 jet(2.0, 0.3, -1.0, 5.0);
  CHECK(make_operator(ho_spec(3.0, 2.0)).apply(jet) ==
        doctest::Approx(5.0 + 1.5 * 2.0));

  OperatorSpec diff;
  diff.kind = OperatorKind::ContinuousDiffusion;
  diff.c = 2.0;
  CHECK(make_operator(diff).apply(jet) == doctest::Approx(0.3 - 2.0 * 5.0));

  // Euler step: u_t + P u - Q u^rho with the forward difference in u_t.
  CHECK(make_operator(euler_spec(1.0, 0.5, 2, 0.01)).apply(jet) ==
        doctest::Approx(0.3 + 2.0 - 0.5 * 4.0));

  // FDM: u_t - c(u) u_xx with the saturating law c(u) = a / (1 + u^2).
  Operator sat = make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5));
  CHECK(sat.coef_value(2.0) == doctest::Approx(0.1 / 5.0));
  CHECK(sat.apply(jet) == doctest::Approx(0.3 - (0.1 / 5.0) * 5.0));
}

TEST_CASE("saturating coefficient derivative matches a finite difference") {
  Operator sat = make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5));
  std::mt19937_64 rng = rng_stream(5, 11);
  std::uniform_real_distribution<double> uu(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    double u = uu(rng);
    const double h = 1e-6;
    double fd = (sat.coef_value(u + h) - sat.coef_value(u - h)) / (2 * h);
    CHECK(sat.coef_derivative(u) ==
          doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("jet partials match finite differences of the residual") {
  std::vector<Operator> ops = {
      make_operator(ho_spec(2.0, 0.5)),
      make_operator(euler_spec(1.0, 0.5, 2, 0.01)),
      make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5)),
  };
  OperatorSpec diff;
  diff.kind = OperatorKind::ContinuousDiffusion;
  diff.c = 1.5;
  ops.push_back(make_operator(diff));

  std::mt19937_64 rng = rng_stream(5, 12);
  std::uniform_real_distribution<double> uj(-2.0, 2.0);
  for (const Operator& op : ops) {
    for (int trial = 0; trial < 50; ++trial) {
      Jet4 jet(uj(rng), uj(rng), uj(rng), uj(rng));
      Jet4 grad = op.partials(jet);
      for (int s = 0; s < 4; ++s) {
        Jet4 lo = jet, hi = jet;
        const double h = 1e-6;
        lo[s] -= h;
        hi[s] += h;
        double fd = (op.apply(hi) - op.apply(lo)) / (2 * h);
        CHECK(std::fabs(grad[s] - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("the linear part agrees with the operator exactly when linear") {
  std::mt19937_64 rng = rng_stream(5, 13);
  std::uniform_real_distribution<double> uj(-2.0, 2.0);
  for (const Operator& op : {make_operator(ho_spec(2.0, 0.5)),
                             make_operator(euler_spec(1.0, 0.0, 0, 0.01)),
                             make_operator(fdm_spec(CoefKind::Const, 0.01, 0.5))}) {
    Operator lin = op.linear_part();
    CHECK(lin.linear());
    for (int i = 0; i < 20; ++i) {
      Jet4 jet(uj(rng), uj(rng), uj(rng), uj(rng));
      CHECK(lin.apply(jet) == doctest::Approx(op.apply(jet)).epsilon(1e-14));
    }
  }
}

TEST_CASE("the linear part is the gradient at the zero jet") {
  std::mt19937_64 rng = rng_stream(5, 14);
  std::uniform_real_distribution<double> uj(-2.0, 2.0);
  for (const Operator& op :
       {make_operator(euler_spec(1.0, 0.5, 2, 0.01)),
        make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5))}) {
    Operator lin = op.linear_part();
    CHECK(lin.linear());
    Jet4 g0 = op.partials(Jet4::Zero());
    for (int i = 0; i < 20; ++i) {
      Jet4 jet(uj(rng), uj(rng), uj(rng), uj(rng));
      CHECK(lin.apply(jet) == doctest::Approx(g0.dot(jet)).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid stencils annihilate reference rollouts") {
  // Euler scheme values computed straight from the recurrence
  // y_{tau+1} = y_tau - h (P y_tau - Q y_tau^rho), independently of this code.
  {
    BasisSpec bs;
    bs.family = BasisFamily::GridIndicator1D;
    bs.T = 0.04;
    bs.h_t = 0.01;
    BasisSet basis = make_basis(bs);
    REQUIRE(basis.size() == 4);
    Operator op = make_operator(euler_spec(1.0, 0.5, 2, 0.01));
    Vec w(4);
    w << 0.5, 0.49625000000000002, 0.49251882031250005, 0.48880650605118514;
    for (int node : residual_nodes(basis))
      CHECK(std::fabs(apply(op, basis, w, node)) <= 1e-12);
  }
  // FDM rollout, periodic in x, u^0 = (1.5, 0.3, -0.2, 0.7) on a 4-cell ring.
  {
    BasisSpec bs;
    bs.family = BasisFamily::GridIndicator2D;
    bs.T = 0.02;
    bs.Xi = 1.0;
    bs.h_t = 0.01;
    bs.h_x = 0.5;
    BasisSet basis = make_basis(bs);
    REQUIRE(basis.n_x() == 4);
    REQUIRE(basis.n_t() == 2);
    Vec w(12);
    w << 1.5, 0.3, -0.2, 0.7,  //
        1.4199999999999999, 0.32799999999999996, -0.14400000000000002,
        0.69599999999999995,  //
        1.3473599999999999, 0.35279999999999995, -0.091520000000000018,
        0.69135999999999997;
    Operator op = make_operator(fdm_spec(CoefKind::Const, 0.01, 0.5));
    for (int node : residual_nodes(basis))
      CHECK(std::fabs(apply(op, basis, w, node)) <= 1e-12);

    Vec ws(12);
    ws << 1.5, 0.3, -0.2, 0.7,  //
        1.4975384615384615, 0.30256880733944952, -0.19461538461538463,
        0.69973154362416101,  //
        1.4950802324708266, 0.30512585672958581, -0.18925238455522872,
        0.6994723104345355;
    Operator sat = make_operator(fdm_spec(CoefKind::Saturating, 0.01, 0.5));
    for (int node : residual_nodes(basis))
      CHECK(std::fabs(apply(sat, basis, ws, node)) <= 1e-12);
  }
}

TEST_CASE("operator names round-trip") {
  for (OperatorKind k :
       {OperatorKind::HarmonicOscillator, OperatorKind::ContinuousDiffusion,
        OperatorKind::EulerBernoulli, OperatorKind::FdmDiffusion})
    CHECK(operator_kind_from_string(to_string(k)) == k);
  for (CoefKind k : {CoefKind::Const, CoefKind::Saturating})
    CHECK(coef_kind_from_string(to_string(k)) == k);
}
