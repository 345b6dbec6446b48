#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "fgal/derivative.hpp"
#include "fgal/fixed_point.hpp"
#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

using namespace fgal;

namespace {

struct DerivSetup {
  SpatialDomain dom;
  ExternalPotential ext;
  HartreeTable table;
  GalerkinBasis basis;
  TimeGrid grid{0.5, 8, 4};
  PropagatorConfig pc{4, 1.0, 1.0};
  CMat psi0;
  Trajectory psi;

  explicit DerivSetup(double coupling = 0.1, int samples = 8)
      : dom(make_domain(1.0, 256)),
        ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
            12.566370614359172, 1.0},
        table(make_hartree_table(dom, HartreeKernel{0.1, 1.0, coupling})),
        basis(build_basis(dom, 4)) {
    grid.samples = samples;
    psi0 = CMat::Zero(4, 2);
    psi0(0, 0) = Complex(0.9, 0.1);
    psi0(2, 0) = Complex(0.0, 0.3);
    psi0(1, 1) = 0.8;
    psi0(3, 1) = Complex(0.25, -0.2);
    psi = solve_fixed_point(basis, ext, table, psi0, grid,
                            FixedPointConfig{1e-10, 25, 1.0}, pc)
              .first;
  }

  DerivativeContext context() const {
    return make_derivative_context(basis, ext, table, psi, psi0, pc);
  }
};

Trajectory axpy(const Trajectory& base, double scale, const Trajectory& dir) {
  Trajectory out = base;
  for (size_t j = 0; j < out.c.size(); ++j) out.c[j] += scale * dir.c[j];
  return out;
}

}  // namespace

TEST_SUITE("derivative") {
  TEST_CASE("derivative vanishes for zero directions and zero coupling") {
    DerivSetup s;
    DerivativeContext ctx = s.context();
    Trajectory zero = zero_trajectory(s.basis, s.grid, 2);
    CHECK(traj_norm(apply_Kn_prime(ctx, zero)) <= 1e-14);

    DerivSetup off(0.0);
    DerivativeContext ctx0 = off.context();
    Trajectory omega = unit_ball_draw(off.basis, off.grid, 2, 42);
    CHECK(traj_norm(apply_Kn_prime(ctx0, omega)) <= 1e-14);
    RealLinearOperator op = build_operator(ctx0, 8192);
    CHECK(op.matrix.norm() <= 1e-14);
    CHECK(invertibility_margin(op) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("derivative is real-linear but not complex-linear") {
    DerivSetup s;
    DerivativeContext ctx = s.context();
    Trajectory w1 = unit_ball_draw(s.basis, s.grid, 2, 7);
    Trajectory w2 = unit_ball_draw(s.basis, s.grid, 2, 8);
    Trajectory combo = axpy(axpy(zero_trajectory(s.basis, s.grid, 2), 0.3, w1),
                            -1.2, w2);
    Trajectory lhs = apply_Kn_prime(ctx, combo);
    Trajectory rhs = axpy(axpy(zero_trajectory(s.basis, s.grid, 2), 0.3,
                               apply_Kn_prime(ctx, w1)),
                          -1.2, apply_Kn_prime(ctx, w2));
    CHECK(traj_dist(lhs, rhs) <= 1e-10 * std::max(1.0, traj_norm(lhs)));
    CHECK(traj_norm(apply_Kn_prime(ctx, w1)) > 1e-6);

    Trajectory iw = w1;
    for (CMat& c : iw.c) c *= Complex(0.0, 1.0);
    Trajectory img_iw = apply_Kn_prime(ctx, iw);
    Trajectory i_img = apply_Kn_prime(ctx, w1);
    for (CMat& c : i_img.c) c *= Complex(0.0, 1.0);
    CHECK(traj_dist(img_iw, i_img) > 1e-6);
  }

  TEST_CASE("finite difference of the map matches the derivative") {
    DerivSetup s(0.1, 64);
    DerivativeContext ctx = s.context();
    Trajectory omega = unit_ball_draw(s.basis, s.grid, 2, 11);
    Trajectory image = apply_Kn_prime(ctx, omega);
    Trajectory k_base = apply_Kn(s.basis, s.ext, s.table, s.psi, s.psi0, s.pc);
    double eps = 1e-2;
    Trajectory k_shift =
        apply_Kn(s.basis, s.ext, s.table, axpy(s.psi, eps, omega), s.psi0,
                 s.pc);
    Trajectory predicted = axpy(k_base, eps, image);
    double err = traj_dist(k_shift, predicted) / eps;
    CHECK(err <= 2e-3);
    // Context built on the fly agrees with the cached one.
    Trajectory direct = apply_Kn_prime(s.basis, s.ext, s.table, s.psi, omega,
                                       s.psi0, s.pc);
    CHECK(traj_dist(direct, image) <= 1e-12);
  }

  TEST_CASE("realified operator reproduces the directional action") {
    DerivSetup s;
    DerivativeContext ctx = s.context();
    Trajectory omega = unit_ball_draw(s.basis, s.grid, 2, 3);
    RVec v = realify(omega);
    CHECK(v.size() == 2 * 2 * 4 * (s.grid.samples + 1));
    Trajectory back = unrealify(s.basis, s.grid, 2, v);
    CHECK(traj_dist(back, omega) == 0.0);

    RealLinearOperator op = build_operator(ctx, 8192);
    CHECK(op.matrix.rows() == v.size());
    RVec applied = op.matrix * v;
    RVec expected = realify(apply_Kn_prime(ctx, omega));
    CHECK((applied - expected).norm() <= 1e-10 * expected.norm());
  }

  TEST_CASE("operator construction honors the dimension cap") {
    DerivSetup s;
    DerivativeContext ctx = s.context();
    CHECK_THROWS_AS(build_operator(ctx, 10), ConfigError);
  }

  TEST_CASE("power iteration matches a dense singular value") {
    std::mt19937 gen(987654321u);
    auto uniform = [&] { return (gen() + 0.5) / 4294967296.0 - 0.5; };
    RMat m(20, 20);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) m(i, j) = uniform();
    Eigen::JacobiSVD<RMat> svd(m);
    double exact = svd.singularValues()(0);
    CHECK(operator_norm_power(m, 500, 1e-14) ==
          doctest::Approx(exact).epsilon(1e-6));
  }

  TEST_CASE("invertibility margin is consistent with the operator norm") {
    DerivSetup s;
    DerivativeContext ctx = s.context();
    RealLinearOperator op = build_operator(ctx, 8192);
    double norm = operator_norm_power(op.matrix, 200, 1e-12);
    double margin = invertibility_margin(op);
    CHECK(margin >= 1.0 - norm - 1e-7);
    CHECK(margin <= 1.0 + norm + 1e-7);
    RMat eye = RMat::Identity(op.matrix.rows(), op.matrix.cols());
    Eigen::JacobiSVD<RMat> svd(eye - op.matrix);
    double exact = svd.singularValues().tail(1)(0);
    CHECK(margin == doctest::Approx(exact).epsilon(1e-8));
  }

  TEST_CASE("unit ball draws are deterministic and normalized") {
    DerivSetup s;
    Trajectory a = unit_ball_draw(s.basis, s.grid, 2, 2024);
    Trajectory b = unit_ball_draw(s.basis, s.grid, 2, 2024);
    CHECK(traj_dist(a, b) == 0.0);
    Trajectory c = unit_ball_draw(s.basis, s.grid, 2, 2025);
    CHECK(traj_dist(a, c) > 0.01);
    for (const CMat& state : a.c) {
      double norm_sq = state.real().squaredNorm() + state.imag().squaredNorm();
      CHECK(std::sqrt(norm_sq) == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(traj_norm(a) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("dispersion estimate decreases with dimension") {
    SpatialDomain dom = make_domain(1.0, 256);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          12.566370614359172, 1.0};
    HartreeTable table = make_hartree_table(dom, HartreeKernel{0.1, 1.0, 0.1});
    GalerkinBasis wide = build_basis(dom, 16);
    TimeGrid grid{0.5, 6, 2};
    PropagatorConfig pc{2, 1.0, 1.0};
    CMat psi0 = CMat::Zero(16, 2);
    psi0(0, 0) = Complex(0.9, 0.1);
    psi0(2, 0) = Complex(0.0, 0.3);
    psi0(1, 1) = 0.8;
    psi0(3, 1) = Complex(0.25, -0.2);
    Trajectory psi = solve_fixed_point(wide, ext, table, psi0, grid,
                                       FixedPointConfig{1e-10, 25, 1.0}, pc)
                         .first;
    DerivativeContext ctx =
        make_derivative_context(wide, ext, table, psi, psi0, pc);
    GalerkinBasis b2 = build_basis(dom, 2);
    GalerkinBasis b4 = build_basis(dom, 4);
    GalerkinBasis b8 = build_basis(dom, 8);
    auto disp = dispersion_estimate({&b2, &b4, &b8}, ctx, 6, 99);
    REQUIRE(disp.size() == 3);
    CHECK(disp[0].first == 2);
    CHECK(disp[0].second > disp[1].second);
    CHECK(disp[1].second > disp[2].second);
    CHECK(disp[2].second > 0.0);
    auto again = dispersion_estimate({&b2, &b4, &b8}, ctx, 6, 99);
    CHECK(again[1].second == disp[1].second);
  }
}
