#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "pireg/basis.hpp"
#include "pireg/rng.hpp"

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

}  // namespace

TEST_CASE("fourier basis lists the constant then cos/sin pairs") {
  BasisSet basis = make_basis(fourier_spec(2));
  REQUIRE(basis.size() == 5);
  REQUIRE(basis.domain_dim() == 1);
  CHECK(basis.domain().lo[0] == 0.0);
  CHECK(basis.domain().hi[0] == doctest::Approx(kTwoPi));

  // Full-period frequencies: member order {1, cos(x), sin(x), cos(2x), sin(2x)}.
  const double x = 0.7;
  Vec v = basis.eval(pt(x));
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(std::cos(x)));
  CHECK(v[2] == doctest::Approx(std::sin(x)));
  CHECK(v[3] == doctest::Approx(std::cos(2 * x)));
  CHECK(v[4] == doctest::Approx(std::sin(2 * x)));
  CHECK(basis.fourier_index(0) == 1);
  CHECK(basis.fourier_index(1) == 2);
}

TEST_CASE("omitting the fundamental keeps the size and shifts frequencies") {
  BasisSet basis = make_basis(fourier_spec(8, true));
  REQUIRE(basis.size() == 17);
  // Pair slots now carry j = 2..9.
  for (int s = 0; s < 8; ++s) CHECK(basis.fourier_index(s) == s + 2);
  const double x = 1.3;
  Vec v = basis.eval(pt(x));
  CHECK(v[1] == doctest::Approx(std::cos(2 * x)));
  CHECK(v[2] == doctest::Approx(std::sin(2 * x)));
  CHECK(v[15] == doctest::Approx(std::cos(9 * x)));
  CHECK(v[16] == doctest::Approx(std::sin(9 * x)));
}

TEST_CASE("jet rows match finite differences of lower orders") {
  // First derivatives against a central difference of the values; second
  // derivatives use a wider step because a second difference divides
  // round-off by h^2 (1e-5 would leave ~1e-5 absolute noise).
  std::vector<BasisSpec> specs;
  specs.push_back(fourier_spec(2));
  specs.push_back(fourier_spec(3, true));
  {
    BasisSpec s;
    s.family = BasisFamily::DiffusionTensor;
    s.T = 1.0;
    s.Xi = 1.0;
    s.c = 1.0;
    s.d_x = 2;
    s.d_t = 2;
    specs.push_back(s);
  }

  for (const BasisSpec& spec : specs) {
    BasisSet basis = make_basis(spec);
    Box box = basis.domain();
    std::mt19937_64 rng = rng_stream(17, 1);
    std::uniform_real_distribution<double> ux(box.lo[0], box.hi[0]);
    std::uniform_real_distribution<double> ut(box.lo[1], box.hi[1]);

    const bool two_d = basis.domain_dim() == 2;
    std::vector<DerivOrder> first, second;
    first.push_back(DerivOrder{1, 0});
    second.push_back(DerivOrder{2, 0});
    if (two_d) first.push_back(DerivOrder{0, 1});

    for (int trial = 0; trial < 100; ++trial) {
      // Stay away from the domain edges so the stencils remain inside.
      double x = box.lo[0] + 0.05 * (box.hi[0] - box.lo[0]) +
                 0.9 * (ux(rng) - box.lo[0]);
      if (x > box.hi[0]) x = box.hi[0] - 1e-3;
      double t = two_d ? box.lo[1] + 0.05 * (box.hi[1] - box.lo[1]) +
                             0.9 * (ut(rng) - box.lo[1])
                       : 0.0;
      if (two_d && t > box.hi[1]) t = box.hi[1] - 1e-3;
      Point p = two_d ? pt(x, t) : pt(x);

      Mat jet1 = basis.eval_jet(p, first);
      const double h1 = 1e-5;
      for (int axis = 0; axis < (two_d ? 2 : 1); ++axis) {
        Point lo = p, hi = p;
        lo[axis] -= h1;
        hi[axis] += h1;
        Vec fd = (basis.eval(hi) - basis.eval(lo)) / (2 * h1);
        for (int j = 0; j < basis.size(); ++j) {
          double want = jet1(axis, j);
          CHECK(std::fabs(fd[j] - want) <=
                1e-6 * std::max(1.0, std::fabs(want)));
        }
      }

      Mat jet2 = basis.eval_jet(p, second);
      const double h2 = 1e-3;
      Point lo = p, hi = p;
      lo[0] -= h2;
      hi[0] += h2;
      Vec fd2 =
          (basis.eval(hi) - 2.0 * basis.eval(p) + basis.eval(lo)) / (h2 * h2);
      for (int j = 0; j < basis.size(); ++j) {
        double want = jet2(0, j);
        CHECK(std::fabs(fd2[j] - want) <=
              1e-6 * std::max(1.0, std::fabs(want)));
      }
    }
  }
}

TEST_CASE("identical specs build identical function tables") {
  BasisSet a = make_basis(fourier_spec(4, true));
  BasisSet b = make_basis(fourier_spec(4, true));
  std::mt19937_64 rng = rng_stream(3, 2);
  std::uniform_real_distribution<double> ux(0.0, kTwoPi);
  for (int i = 0; i < 50; ++i) {
    Point p = pt(ux(rng));
    Vec va = a.eval(p), vb = b.eval(p);
    for (int j = 0; j < a.size(); ++j) CHECK(va[j] == vb[j]);
  }
}

TEST_CASE("distinct fourier members are orthogonal under the trapezoid rule") {
  for (bool omit : {false, true}) {
    BasisSet basis = make_basis(fourier_spec(3, omit));
    const int N = 4096;
    const double h = kTwoPi / N;
    Mat gram = Mat::Zero(basis.size(), basis.size());
    for (int i = 0; i < N; ++i) {
      Vec v = basis.eval(pt(i * h));
      gram += h * v * v.transpose();  // periodic: all nodes weigh h
    }
    for (int a = 0; a < basis.size(); ++a)
      for (int b = 0; b < basis.size(); ++b)
        if (a != b) CHECK(std::fabs(gram(a, b)) <= 1e-8 * kTwoPi);
  }
}

TEST_CASE("grid indicators partition the domain") {
  BasisSpec s;
  s.family = BasisFamily::GridIndicator1D;
  s.T = 1.0;
  s.h_t = 0.1;
  BasisSet basis = make_basis(s);
  // The 1-D family carries one cell per time step: y_0 .. y_{n_t - 1}.
  REQUIRE(basis.size() == basis.n_t());

  std::mt19937_64 rng = rng_stream(23, 4);
  std::uniform_real_distribution<double> ux(0.0, basis.domain().hi[0] * 0.999);
  for (int i = 0; i < 40; ++i) {
    Point p = pt(ux(rng));
    Vec v = basis.eval(p);
    CHECK(v.sum() == doctest::Approx(1.0));        // exactly one cell is hot
    CHECK(v.maxCoeff() == doctest::Approx(1.0));
    CHECK(v[basis.cell_index(p)] == doctest::Approx(1.0));
  }
  // Node representatives land back in their own cell.
  for (int j = 0; j < basis.size(); ++j)
    CHECK(basis.cell_index(basis.cell_node(j)) == j);
}

TEST_CASE("2-d grid indicators expose the expected cell count") {
  BasisSpec s;
  s.family = BasisFamily::GridIndicator2D;
  s.T = 1.0;
  s.Xi = 1.0;
  s.h_t = 0.2;
  s.h_x = 0.5;
  BasisSet basis = make_basis(s);
  CHECK(basis.n_t() == 5);
  CHECK(basis.n_x() == 4);
  REQUIRE(basis.size() == (basis.n_t() + 1) * basis.n_x());
  for (int j = 0; j < basis.size(); ++j)
    CHECK(basis.cell_index(basis.cell_node(j)) == j);
}
