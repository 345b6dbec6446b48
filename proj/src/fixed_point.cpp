#include "fgal/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fgal {

double IterationLog::max_ratio() const {
  double m = 0.0;
  for (double r : ratios) m = std::max(m, r);
  return m;
}

Trajectory apply_Kn(const GalerkinBasis& basis, const ExternalPotential& ext,
                    const HartreeTable& table, const Trajectory& psi_star,
                    const CMat& psi0, const PropagatorConfig& cfg) {
  if (psi_star.basis != &basis)
    throw NumericalError("apply_Kn: trajectory is not on the given basis");
  DensityTrajectory rho = density_from_trajectory(psi_star);
  return propagate_full(basis, ext, table, rho, psi0, cfg);
}

std::pair<Trajectory, IterationLog> solve_fixed_point(
    const GalerkinBasis& basis, const ExternalPotential& ext,
    const HartreeTable& table, const CMat& psi0, const TimeGrid& grid,
    const FixedPointConfig& fp, const PropagatorConfig& cfg) {
  if (!(fp.tolerance > 0.0))
    throw ConfigError("fixed point tolerance must be positive");
  if (fp.max_iterations < 1)
    throw ConfigError("fixed point iteration budget must be positive");
  if (!(fp.damping > 0.0 && fp.damping <= 1.0))
    throw ConfigError("fixed point damping must lie in (0, 1]");

  // Initial guess: one application of the map to the external-only evolution.
  DensityTrajectory no_rho = zero_density(*basis.dom, grid);
  Trajectory psi = propagate_full(basis, ext, table, no_rho, psi0, cfg);
  psi = apply_Kn(basis, ext, table, psi, psi0, cfg);

  IterationLog log;
  int stalled = 0;
  for (int it = 1; it <= fp.max_iterations; ++it) {
    Trajectory next = apply_Kn(basis, ext, table, psi, psi0, cfg);
    if (fp.damping < 1.0) {
      for (size_t j = 0; j < next.c.size(); ++j)
        next.c[j] = (1.0 - fp.damping) * psi.c[j] + fp.damping * next.c[j];
      next.c[0] = psi0;
    }
    double res = traj_dist(next, psi);
    log.iterations = it;
    log.residuals.push_back(res);
    if (log.residuals.size() >= 2) {
      double prev = log.residuals[log.residuals.size() - 2];
      double ratio = prev > 0.0 ? res / prev
                                : (res > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      log.ratios.push_back(ratio);
      stalled = ratio >= 1.0 ? stalled + 1 : 0;
    }
    psi = std::move(next);
    if (res <= fp.tolerance) {
      log.converged = true;
      return {std::move(psi), std::move(log)};
    }
    if (stalled >= 3)
      throw NonContractionError(
          "fixed point iteration stopped contracting after " +
          std::to_string(it) + " iterations");
  }
  throw MaxIterationsError("fixed point did not reach tolerance in " +
                           std::to_string(fp.max_iterations) + " iterations");
}

ReferenceSolution solve_reference(const GalerkinBasis& ref_basis,
                                  const ExternalPotential& ext,
                                  const HartreeTable& table, const CMat& psi0,
                                  const TimeGrid& grid,
                                  const FixedPointConfig& fp,
                                  const PropagatorConfig& cfg) {
  auto [psi, log] =
      solve_fixed_point(ref_basis, ext, table, psi0, grid, fp, cfg);
  ReferenceSolution ref;
  ref.psi = std::move(psi);
  ref.psi0 = psi0;
  ref.n_ref = ref_basis.dim;
  ref.residual = log.residuals.empty() ? 0.0 : log.residuals.back();
  ref.iterations = log.iterations;
  ref.prop = cfg;
  return ref;
}

Trajectory apply_K_ref(const GalerkinBasis& ref_basis,
                       const ExternalPotential& ext, const HartreeTable& table,
                       const ReferenceSolution& ref, const Trajectory& traj) {
  Trajectory on_ref =
      traj.basis == &ref_basis ? traj : inject_to(ref_basis, traj);
  return apply_Kn(ref_basis, ext, table, on_ref, ref.psi0, ref.prop);
}

}  // namespace fgal
