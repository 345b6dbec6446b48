#include <cmath>
#include <complex>

#include "doctest.h"
#include "fgal/evolution.hpp"
#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

using namespace fgal;

namespace {

double gram_norm(const RMat& gram, const CVec& c) {
  RVec re = c.real();
  RVec im = c.imag();
  return std::sqrt(re.dot(gram * re) + im.dot(gram * im));
}

DensityTrajectory analytic_density(const SpatialDomain& dom,
                                   const TimeGrid& grid, bool second) {
  DensityTrajectory rho;
  rho.grid = grid;
  RVec s1(dom.size()), s2(dom.size());
  for (int i = 0; i < dom.size(); ++i) {
    double a = std::sin(M_PI * dom.nodes(i));
    double b = std::sin(2.0 * M_PI * dom.nodes(i));
    s1(i) = a * a;
    s2(i) = b * b;
  }
  for (int j = 0; j <= grid.samples; ++j) {
    double t = grid.time(j);
    RVec r = s1 * (1.0 + 0.3 * std::cos(3.0 * t));
    if (second) r += s2 * (0.3 + 0.15 * std::sin(2.0 * t));
    rho.rho.push_back(r);
  }
  return rho;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("assembled matrix matches a quadrature oracle") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 3);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          2.0, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.3};
    RVec rho(dom.size());
    for (int i = 0; i < dom.size(); ++i)
      rho(i) = 1.0 + std::cos(2.0 * dom.nodes(i));
    double t = 0.37, hbar = 1.25, mass = 0.8;
    GalerkinHamiltonian h = assemble(basis, ext, kernel, rho, t, hbar, mass);
    CHECK(h.hbar == hbar);
    CHECK(h.mass == mass);
    RVec ve = effective_potential(ext, kernel, dom, rho, t);
    RMat expected(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = hbar * hbar / (2.0 * mass) *
                     (basis.derivs.col(i).cwiseProduct(basis.derivs.col(j)))
                         .dot(dom.weights);
        acc += (basis.fields.col(i).cwiseProduct(basis.fields.col(j))
                    .cwiseProduct(ve))
                   .dot(dom.weights);
        expected(i, j) = acc;
      }
    CHECK((h.matrix - expected).norm() <= 1e-12 * expected.norm());
    CHECK((h.matrix - h.matrix.transpose()).norm() <= 1e-12);
  }

  TEST_CASE("free eigenmode acquires the analytic phase at second order") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 2);
    ExternalPotential zero;
    HartreeKernel off{0.1, 1.0, 0.0};
    HartreeTable table = make_hartree_table(dom, off);
    TimeGrid grid{0.25, 8, 4};
    DensityTrajectory rho = zero_density(dom, grid);
    CMat psi0 = CMat::Zero(2, 1);
    psi0(0, 0) = 1.0;
    double energy = M_PI * M_PI / 2.0;

    auto phase_err = [&](int substeps) {
      PropagatorConfig pc{substeps, 1.0, 1.0};
      Trajectory traj = propagate_full(basis, zero, table, rho, psi0, pc);
      Complex amp = traj.c[8](0, 0);
      Complex exact = std::exp(Complex(0.0, -energy * 0.25));
      return std::abs(std::arg(amp * std::conj(exact)));
    };
    double coarse = phase_err(4);
    double fine = phase_err(8);
    CHECK(coarse <= 1e-3);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
  }

  TEST_CASE("propagation conserves every orbital norm") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 6);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          12.566370614359172, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.1};
    HartreeTable table = make_hartree_table(dom, kernel);
    TimeGrid grid{0.5, 8, 4};
    DensityTrajectory rho = analytic_density(dom, grid, true);
    CMat psi0(6, 2);
    psi0.setZero();
    psi0(0, 0) = Complex(0.8, 0.1);
    psi0(2, 0) = Complex(0.0, 0.4);
    psi0(1, 1) = 0.7;
    psi0(5, 1) = Complex(0.2, -0.3);
    Trajectory traj =
        propagate_full(basis, ext, table, rho, psi0, PropagatorConfig{4, 1.0, 1.0});
    CHECK((traj.c[0] - psi0).norm() == 0.0);
    for (int k = 0; k < 2; ++k) {
      double init = gram_norm(basis.gram_l2, psi0.col(k));
      for (int j = 1; j <= 8; ++j)
        CHECK(std::abs(gram_norm(basis.gram_l2, traj.c[j].col(k)) - init) <=
              1e-12);
    }
  }

  TEST_CASE("interval propagation composes like a cocycle") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          6.0, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.1};
    HartreeTable table = make_hartree_table(dom, kernel);
    TimeGrid grid{0.5, 6, 3};
    DensityTrajectory rho = analytic_density(dom, grid, true);
    CMat psi0(4, 1);
    psi0 << Complex(0.9, 0.0), Complex(0.0, 0.3), Complex(0.1, 0.1), 0.0;
    PropagatorConfig pc{3, 1.0, 1.0};
    std::vector<CMat> whole = propagate(basis, ext, table, rho, psi0, 0, 6, pc);
    REQUIRE(static_cast<int>(whole.size()) == 7);
    std::vector<CMat> first = propagate(basis, ext, table, rho, psi0, 0, 4, pc);
    std::vector<CMat> second =
        propagate(basis, ext, table, rho, first.back(), 4, 6, pc);
    CHECK((second.back() - whole.back()).norm() <= 1e-13);
    CHECK((first[2] - whole[2]).norm() == 0.0);
  }

  TEST_CASE("cached flow maps reproduce the propagator") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          6.0, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.1};
    HartreeTable table = make_hartree_table(dom, kernel);
    TimeGrid grid{0.5, 6, 3};
    DensityTrajectory rho = analytic_density(dom, grid, false);
    CMat psi0(4, 2);
    psi0.setZero();
    psi0(0, 0) = 1.0;
    psi0(3, 1) = Complex(0.2, 0.5);
    PropagatorConfig pc{3, 1.0, 1.0};
    FlowMaps maps = build_flow_maps(basis, ext, table, rho, pc);
    REQUIRE(static_cast<int>(maps.step.size()) == 6);
    std::vector<CMat> mapped = states_from_maps(maps, psi0);
    std::vector<CMat> direct = propagate(basis, ext, table, rho, psi0, 0, 6, pc);
    REQUIRE(mapped.size() == direct.size());
    for (size_t j = 0; j < mapped.size(); ++j)
      CHECK((mapped[j] - direct[j]).norm() <= 1e-10);
  }

  TEST_CASE("two-density identity residual vanishes in degenerate cases") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          6.0, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.1};
    HartreeTable table = make_hartree_table(dom, kernel);
    TimeGrid grid{0.5, 6, 3};
    DensityTrajectory r1 = analytic_density(dom, grid, false);
    DensityTrajectory r2 = analytic_density(dom, grid, true);
    CMat psi0(4, 1);
    psi0 << 1.0, Complex(0.0, 0.2), 0.0, 0.1;
    PropagatorConfig pc{3, 1.0, 1.0};
    CHECK(evolution_identity_residual(basis, ext, table, r1, r1, psi0, 6, pc) <=
          1e-12);
    HartreeTable off = make_hartree_table(dom, HartreeKernel{0.1, 1.0, 0.0});
    CHECK(evolution_identity_residual(basis, ext, off, r1, r2, psi0, 6, pc) <=
          1e-12);
    CHECK(evolution_identity_residual(basis, ext, table, r1, r2, psi0, 0, pc) ==
          0.0);
    CHECK_THROWS_AS(
        evolution_identity_residual(basis, ext, table, r1, r2, psi0, 7, pc),
        NumericalError);
  }

  TEST_CASE("two-density identity residual refines at second order") {
    SpatialDomain dom = make_domain(1.0, 240);
    GalerkinBasis basis = build_basis(dom, 4);
    ExternalPotential ext{ExternalPotential::Preset::DrivenWell, 1.0, 0.5,
                          6.0, 1.0};
    HartreeKernel kernel{0.1, 1.0, 0.1};
    HartreeTable table = make_hartree_table(dom, kernel);
    CMat psi0(4, 1);
    psi0 << 1.0, Complex(0.0, 0.5), 0.0, 0.0;
    psi0 *= 1.0 / std::sqrt(1.25);

    auto residual = [&](int samples, int substeps) {
      TimeGrid grid{0.5, samples, substeps};
      DensityTrajectory r1 = analytic_density(dom, grid, false);
      DensityTrajectory r2 = analytic_density(dom, grid, true);
      return evolution_identity_residual(basis, ext, table, r1, r2, psi0,
                                         samples,
                                         PropagatorConfig{substeps, 1.0, 1.0});
    };
    // Elevated substeps keep the integrator error subordinate, so the ratio
    // reflects the quadrature order of the identity itself.
    double coarse = residual(8, 16);
    double fine = residual(16, 32);
    CHECK(coarse > 0.0);
    CHECK(coarse / fine >= 2.5);
    CHECK(coarse / fine <= 6.5);
  }
}
