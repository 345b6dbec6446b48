#include "fgal/evolution.hpp"

#include <cmath>

namespace fgal {
namespace {

RMat multiplication_matrix(const GalerkinBasis& basis, const RVec& v) {
  const SpatialDomain& dom = *basis.dom;
  RMat wv = (dom.weights.cwiseProduct(v)).asDiagonal() * basis.fields;
  return basis.fields.transpose() * wv;
}

// Crank-Nicolson substep loop over sample intervals [from, to).  apply is
// called with the factored step (L, R): it must replace its argument by
// L^{-1} R arg; emit is called after each full interval.
template <typename Apply, typename Emit>
void cn_sweep(const GalerkinBasis& basis, const ExternalPotential& ext,
              const std::vector<RVec>& hart, const TimeGrid& grid, int from,
              int to, const PropagatorConfig& cfg, Apply&& apply,
              Emit&& emit) {
  const SpatialDomain& dom = *basis.dom;
  const int dim = basis.dim;
  const double kin = cfg.hbar * cfg.hbar / (2.0 * cfg.mass);
  const double dt_sub = grid.dt() / cfg.substeps;
  const double theta = dt_sub / (2.0 * cfg.hbar);
  CMat lm(dim, dim), rm(dim, dim);
  for (int j = from; j < to; ++j) {
    const double t0 = grid.time(j);
    for (int k = 0; k < cfg.substeps; ++k) {
      const double tm = t0 + (k + 0.5) * dt_sub;
      const double frac = (tm - t0) / grid.dt();
      RVec ve = ext.eval(dom, tm) +
                (1.0 - frac) * hart[j - from] + frac * hart[j - from + 1];
      RMat g = kin * basis.stiffness + multiplication_matrix(basis, ve);
      lm.real() = basis.gram_l2;
      lm.imag() = theta * g;
      rm.real() = basis.gram_l2;
      rm.imag() = -theta * g;
      Eigen::PartialPivLU<CMat> lu(lm);
      apply(lu, rm);
    }
    emit(j + 1);
  }
}

std::vector<RVec> hartree_samples(const HartreeTable& table,
                                  const DensityTrajectory& rho, int from,
                                  int to) {
  std::vector<RVec> h;
  h.reserve(to - from + 1);
  for (int j = from; j <= to; ++j) h.push_back(table.convolve(rho.rho[j]));
  return h;
}

void check_range(const DensityTrajectory& rho, const CMat& psi0,
                 const GalerkinBasis& basis, int from, int to) {
  if (from < 0 || to > rho.grid.samples || from > to)
    throw NumericalError("propagate: sample range out of bounds");
  if (static_cast<int>(rho.rho.size()) != rho.grid.samples + 1)
    throw NumericalError("propagate: density sample count mismatch");
  if (psi0.rows() != basis.dim)
    throw NumericalError("propagate: initial coefficients do not match basis");
}

}  // namespace

GalerkinHamiltonian assemble(const GalerkinBasis& basis,
                             const ExternalPotential& ext,
                             const HartreeKernel& kernel, const RVec& rho,
                             double t, double hbar, double mass) {
  RVec ve = effective_potential(ext, kernel, *basis.dom, rho, t);
  GalerkinHamiltonian h;
  h.basis = &basis;
  h.hbar = hbar;
  h.mass = mass;
  h.matrix = (hbar * hbar / (2.0 * mass)) * basis.stiffness +
             multiplication_matrix(basis, ve);
  return h;
}

std::vector<CMat> propagate(const GalerkinBasis& basis,
                            const ExternalPotential& ext,
                            const HartreeTable& table,
                            const DensityTrajectory& rho, const CMat& psi0,
                            int from, int to, const PropagatorConfig& cfg) {
  check_range(rho, psi0, basis, from, to);
  std::vector<RVec> hart = hartree_samples(table, rho, from, to);
  std::vector<CMat> states;
  states.reserve(to - from + 1);
  states.push_back(psi0);
  CMat cur = psi0;
  cn_sweep(
      basis, ext, hart, rho.grid, from, to, cfg,
      [&](const Eigen::PartialPivLU<CMat>& lu, const CMat& rm) {
        cur = lu.solve(rm * cur);
        if (!cur.allFinite())
          throw NumericalError("propagate: singular step matrix");
      },
      [&](int) { states.push_back(cur); });
  return states;
}

Trajectory propagate_full(const GalerkinBasis& basis,
                          const ExternalPotential& ext,
                          const HartreeTable& table,
                          const DensityTrajectory& rho, const CMat& psi0,
                          const PropagatorConfig& cfg) {
  std::vector<CMat> states =
      propagate(basis, ext, table, rho, psi0, 0, rho.grid.samples, cfg);
  Trajectory t;
  t.basis = &basis;
  t.grid = rho.grid;
  t.grid.substeps = cfg.substeps;
  t.orbitals = static_cast<int>(psi0.cols());
  t.c = std::move(states);
  return t;
}

FlowMaps build_flow_maps(const GalerkinBasis& basis,
                         const ExternalPotential& ext,
                         const HartreeTable& table,
                         const DensityTrajectory& rho,
                         const PropagatorConfig& cfg) {
  check_range(rho, CMat::Zero(basis.dim, 1), basis, 0, rho.grid.samples);
  std::vector<RVec> hart = hartree_samples(table, rho, 0, rho.grid.samples);
  FlowMaps maps;
  maps.grid = rho.grid;
  maps.grid.substeps = cfg.substeps;
  maps.step.reserve(rho.grid.samples);
  CMat cur = CMat::Identity(basis.dim, basis.dim);
  cn_sweep(
      basis, ext, hart, rho.grid, 0, rho.grid.samples, cfg,
      [&](const Eigen::PartialPivLU<CMat>& lu, const CMat& rm) {
        cur = lu.solve(rm * cur);
        if (!cur.allFinite())
          throw NumericalError("flow maps: singular step matrix");
      },
      [&](int) {
        maps.step.push_back(cur);
        cur = CMat::Identity(basis.dim, basis.dim);
      });
  return maps;
}

std::vector<CMat> states_from_maps(const FlowMaps& maps, const CMat& psi0) {
  std::vector<CMat> states;
  states.reserve(maps.step.size() + 1);
  states.push_back(psi0);
  for (const CMat& s : maps.step) states.push_back(s * states.back());
  return states;
}

double evolution_identity_residual(const GalerkinBasis& basis,
                                   const ExternalPotential& ext,
                                   const HartreeTable& table,
                                   const DensityTrajectory& rho1,
                                   const DensityTrajectory& rho2,
                                   const CMat& psi0, int t_idx,
                                   const PropagatorConfig& cfg) {
  if (!same_grid(rho1.grid, rho2.grid))
    throw NumericalError("identity residual: density grids differ");
  if (t_idx < 0 || t_idx > rho1.grid.samples)
    throw NumericalError("identity residual: sample index out of range");
  FlowMaps maps1 = build_flow_maps(basis, ext, table, rho1, cfg);
  FlowMaps maps2 = build_flow_maps(basis, ext, table, rho2, cfg);
  std::vector<CMat> u1 = states_from_maps(maps1, psi0);
  std::vector<CMat> u2 = states_from_maps(maps2, psi0);

  Eigen::LLT<RMat> llt(basis.gram_l2);
  const SpatialDomain& dom = *basis.dom;
  auto project_l2 = [&](const CMat& field) {
    CMat rhs(basis.dim, field.cols());
    rhs.real() = basis.fields.transpose() *
                 (dom.weights.asDiagonal() * field.real()).eval();
    rhs.imag() = basis.fields.transpose() *
                 (dom.weights.asDiagonal() * field.imag()).eval();
    CMat out(basis.dim, field.cols());
    out.real() = llt.solve(rhs.real().eval());
    out.imag() = llt.solve(rhs.imag().eval());
    return out;
  };

  // b_j = L2 projection of (V1 - V2)(t_j) applied to U2(t_j, 0) psi0.
  auto bracket = [&](int j) {
    RVec dv = table.convolve(rho1.rho[j]) - table.convolve(rho2.rho[j]);
    CMat field = synthesize_values(basis, u2[j]);
    CMat prod(field.rows(), field.cols());
    prod.real() = dv.asDiagonal() * field.real();
    prod.imag() = dv.asDiagonal() * field.imag();
    return project_l2(prod);
  };

  // Trapezoid accumulation I_j = Phi_{j-1} (I_{j-1} + dt/2 b_{j-1}) + dt/2 b_j
  // realizes the integral of U1(t_j, s) b(s) ds over [0, t_j].
  const double half_dt = 0.5 * rho1.grid.dt();
  CMat integral = CMat::Zero(basis.dim, psi0.cols());
  CMat b_prev = bracket(0);
  for (int j = 1; j <= t_idx; ++j) {
    CMat b_cur = bracket(j);
    integral = maps1.step[j - 1] * (integral + half_dt * b_prev) +
               half_dt * b_cur;
    b_prev = std::move(b_cur);
  }
  const Complex i_over_h(0.0, 1.0 / cfg.hbar);
  CMat defect = u2[t_idx] - u1[t_idx] - i_over_h * integral;
  return defect.norm();
}

}  // namespace fgal
