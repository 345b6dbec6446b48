#include <cmath>
#include <complex>

#include "doctest.h"
#include "fgal/function_space.hpp"
#include "fgal/types.hpp"
#include "oracles.hpp"

using namespace fgal;

namespace {

// Sample an analytic field (value and derivative callables) on the grid.
template <class F, class G>
Field sample_field(const SpatialDomain& dom, F value, G deriv) {
  Field f;
  f.values.resize(dom.size());
  f.deriv.resize(dom.size());
  for (int i = 0; i < dom.size(); ++i) {
    f.values(i) = value(dom.nodes(i));
    f.deriv(i) = deriv(dom.nodes(i));
  }
  return f;
}

}  // namespace

TEST_SUITE("function_space") {
  TEST_CASE("quadrature rule integrates smooth functions") {
    SpatialDomain dom = make_domain(1.0, 100);
    CHECK(dom.size() >= 100);
    CHECK(dom.size() % 12 == 0);
    CHECK(dom.weights.minCoeff() > 0.0);
    CHECK(dom.nodes.minCoeff() > 0.0);
    CHECK(dom.nodes.maxCoeff() < 1.0);
    CHECK(dom.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    // Gauss-Legendre panels are exact on polynomials of this degree.
    double x5 = dom.weights.dot(dom.nodes.array().pow(5).matrix());
    CHECK(x5 == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    double quad = 0.0;
    for (int i = 0; i < dom.size(); ++i)
      quad += dom.weights(i) * std::exp(std::sin(3.0 * dom.nodes(i)));
    double ref = oracle::adaptive_simpson(
        [](double x) { return std::exp(std::sin(3.0 * x)); }, 0.0, 1.0);
    CHECK(quad == doctest::Approx(ref).epsilon(1e-12));
  }

  TEST_CASE("basis columns are normalized sine modes") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    CHECK(basis.dim == 4);
    // sin(pi x) has squared H^1_0 norm (1 + pi^2)/2 on [0, 1].
    const double scale = 0.42895143862767315;
    for (int i = 0; i < dom.size(); ++i) {
      double x = dom.nodes(i);
      CHECK(basis.fields(i, 0) ==
            doctest::Approx(scale * std::sin(M_PI * x)).epsilon(1e-9));
      CHECK(basis.derivs(i, 0) ==
            doctest::Approx(scale * M_PI * std::cos(M_PI * x)).epsilon(1e-9));
    }
  }

  TEST_CASE("gram matrices have the expected structure") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 8);
    RMat eye = RMat::Identity(8, 8);
    CHECK((basis.gram_h1 - eye).norm() <= 1e-10);
    CHECK((basis.gram_l2 - basis.gram_l2.transpose()).norm() <= 1e-14);
    CHECK((basis.stiffness - basis.stiffness.transpose()).norm() <= 1e-14);
    // L2 and stiffness parts sum to the H^1_0 identity.
    CHECK((basis.gram_l2 + basis.stiffness - eye).norm() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<RMat> es(basis.gram_l2);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  TEST_CASE("stiffness diagonal on a wider interval") {
    SpatialDomain dom = make_domain(2.0, 240);
    GalerkinBasis basis = build_basis(dom, 2);
    // mode k: (k pi / L)^2 / (1 + (k pi / L)^2) with L = 2.
    CHECK(basis.stiffness(0, 0) ==
          doctest::Approx(0.711599560857999).epsilon(1e-10));
    CHECK(basis.stiffness(1, 1) ==
          doctest::Approx(0.9080003316496248).epsilon(1e-10));
    CHECK(std::abs(basis.stiffness(0, 1)) <= 1e-10);
    CHECK(basis.stiffness(1, 1) > basis.stiffness(0, 0));
  }

  TEST_CASE("inner products match closed forms") {
    SpatialDomain dom = make_domain(1.0, 240);
    Field s1 = sample_field(
        dom, [](double x) { return std::sin(M_PI * x); },
        [](double x) { return M_PI * std::cos(M_PI * x); });
    Field s2 = sample_field(
        dom, [](double x) { return std::sin(2.0 * M_PI * x); },
        [](double x) { return 2.0 * M_PI * std::cos(2.0 * M_PI * x); });
    CHECK(h10_inner(dom, s1, s1).real() ==
          doctest::Approx(5.434802200544679).epsilon(1e-12));
    CHECK(std::abs(h10_inner(dom, s1, s1).imag()) <= 1e-14);
    CHECK(std::abs(h10_inner(dom, s1, s2)) <= 1e-10);
    CHECK(h10_norm(dom, s1) ==
          doctest::Approx(std::sqrt(5.434802200544679)).epsilon(1e-12));
    CHECK(l2_inner(dom, s1.values, s1.values).real() ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(std::abs(l2_inner(dom, s1.values, s2.values)) <= 1e-14);
  }

  TEST_CASE("finite differences track an analytic derivative") {
    SpatialDomain dom = make_domain(1.0, 1024);
    CVec v(dom.size());
    for (int i = 0; i < dom.size(); ++i) {
      double x = dom.nodes(i);
      v(i) = Complex(std::cos(2.0 * x), std::sin(x));
    }
    CVec d = fd_derivative(dom, v);
    double worst = 0.0;
    for (int i = 0; i < dom.size(); ++i) {
      double x = dom.nodes(i);
      Complex exact(-2.0 * std::sin(2.0 * x), std::cos(x));
      worst = std::max(worst, std::abs(d(i) - exact));
    }
    CHECK(worst <= 1e-3);
  }

  TEST_CASE("projection recovers expansion coefficients") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 8);
    CMat coeff(8, 1);
    coeff.setZero();
    coeff(0, 0) = Complex(0.3, -0.1);
    coeff(3, 0) = Complex(-0.2, 0.7);
    coeff(6, 0) = Complex(0.05, 0.0);
    CMat values = synthesize_values(basis, coeff);
    CMat derivs = synthesize_derivs(basis, coeff);
    Field f{values.col(0), derivs.col(0)};
    CVec back = project_Qn(basis, f);
    CHECK((back - coeff.col(0)).norm() <= 1e-10);
  }

  TEST_CASE("projection of a raw sine lands on one mode") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 8);
    Field s3 = sample_field(
        dom, [](double x) { return std::sin(3.0 * M_PI * x); },
        [](double x) { return 3.0 * M_PI * std::cos(3.0 * M_PI * x); });
    CVec c = project_Qn(basis, s3);
    double expected = std::sqrt((1.0 + 9.0 * M_PI * M_PI) / 2.0);
    CHECK(std::abs(c(2)) == doctest::Approx(expected).epsilon(1e-10));
    for (int i = 0; i < 8; ++i)
      if (i != 2) CHECK(std::abs(c(i)) <= 1e-9);
  }

  TEST_CASE("nested truncation equals orthogonal projection") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis fine = build_basis(dom, 8);
    GalerkinBasis coarse = build_basis(dom, 4);
    TimeGrid grid{0.5, 3, 2};
    Trajectory traj = zero_trajectory(fine, grid, 2);
    for (int j = 0; j <= grid.samples; ++j)
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 8; ++i)
          traj.c[j](i, k) = Complex(std::sin(1.0 + i + j + k),
                                    std::cos(2.0 + i * j - k));
    Trajectory tr = truncate_to(coarse, traj);
    Trajectory pr = project_Pn(coarse, traj);
    CHECK(traj_dist(tr, pr) <= 1e-12);
    Trajectory back = inject_to(fine, tr);
    CHECK(back.c[1].topRows(4) == tr.c[1]);
    CHECK(back.c[1].bottomRows(4).norm() == 0.0);
    Trajectory again = truncate_to(coarse, back);
    CHECK(traj_dist(again, tr) == 0.0);
  }

  TEST_CASE("trajectory norms use the sup over samples") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    TimeGrid grid{1.0, 2, 1};
    Trajectory a = zero_trajectory(basis, grid, 1);
    CHECK(traj_norm(a) == 0.0);
    a.c[0](0, 0) = 1.0;
    a.c[2](1, 0) = Complex(0.0, 2.0);
    CHECK(traj_norm(a) == doctest::Approx(2.0).epsilon(1e-10));
    Trajectory b = a;
    CHECK(traj_dist(a, b) == 0.0);
    b.c[2](1, 0) = 0.0;
    CHECK(traj_dist(a, b) == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("time grid hits the endpoint exactly") {
    TimeGrid grid{0.5, 32, 4};
    CHECK(grid.dt() == doctest::Approx(0.015625).epsilon(1e-15));
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(32) == 0.5);
    CHECK(grid.time(16) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(same_grid(grid, TimeGrid{0.5, 32, 4}));
    CHECK(!same_grid(grid, TimeGrid{0.5, 16, 4}));
  }

  TEST_CASE("basis construction rejects under-resolved grids") {
    SpatialDomain dom = make_domain(1.0, 48);
    CHECK(dom.size() == 48);
    CHECK_NOTHROW(build_basis(dom, 12));
    CHECK_THROWS_AS(build_basis(dom, 13), ConfigError);
  }
}
