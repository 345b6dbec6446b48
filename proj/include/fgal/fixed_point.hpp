#pragma once

#include <vector>

#include "fgal/evolution.hpp"
#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// One application of the Galerkin solution map: freeze the density of
/// psi_star, then propagate psi0 through the resulting linear problem.
/// Sample 0 of the result equals psi0 bitwise.
Trajectory apply_Kn(const GalerkinBasis& basis, const ExternalPotential& ext,
                    const HartreeTable& table, const Trajectory& psi_star,
                    const CMat& psi0, const PropagatorConfig& cfg);

struct FixedPointConfig {
  double tolerance = 1e-8;
  int max_iterations = 25;
  double damping = 1.0;  // theta in (0, 1]
};

struct IterationLog {
  std::vector<double> residuals;  // successive-iterate distances
  std::vector<double> ratios;     // residual ratios
  int iterations = 0;
  bool converged = false;
  double max_ratio() const;
};

/// Damped Picard iteration psi <- (1-theta) psi + theta K_n psi, started from
/// K_n applied to the external-only evolution.  Throws NonContractionError
/// after three consecutive ratios >= 1 and MaxIterationsError when the
/// budget is exhausted.
std::pair<Trajectory, IterationLog> solve_fixed_point(
    const GalerkinBasis& basis, const ExternalPotential& ext,
    const HartreeTable& table, const CMat& psi0, const TimeGrid& grid,
    const FixedPointConfig& fp, const PropagatorConfig& cfg);

/// Fixed point on the reference basis, used as the continuum proxy.
struct ReferenceSolution {
  Trajectory psi;
  CMat psi0;
  int n_ref = 0;
  double residual = 0.0;
  int iterations = 0;
  PropagatorConfig prop;
};

ReferenceSolution solve_reference(const GalerkinBasis& ref_basis,
                                  const ExternalPotential& ext,
                                  const HartreeTable& table, const CMat& psi0,
                                  const TimeGrid& grid,
                                  const FixedPointConfig& fp,
                                  const PropagatorConfig& cfg);

/// Applies the reference-basis solution map to a trajectory from any nested
/// basis (zero-padding the coefficients first).
Trajectory apply_K_ref(const GalerkinBasis& ref_basis,
                       const ExternalPotential& ext, const HartreeTable& table,
                       const ReferenceSolution& ref, const Trajectory& traj);

}  // namespace fgal
