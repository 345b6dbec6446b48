#pragma once

#include <vector>

#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// Galerkin matrix of -(hbar^2/2m) d^2/dx^2 + V_e(t) at one instant.
struct GalerkinHamiltonian {
  const GalerkinBasis* basis = nullptr;
  RMat matrix;  // real symmetric
  double hbar = 1.0;
  double mass = 1.0;
};

GalerkinHamiltonian assemble(const GalerkinBasis& basis,
                             const ExternalPotential& ext,
                             const HartreeKernel& kernel, const RVec& rho,
                             double t, double hbar, double mass);

struct PropagatorConfig {
  int substeps = 1;
  double hbar = 1.0;
  double mass = 1.0;
};

/// Crank-Nicolson propagation of i hbar M c' = G(t) c across sample
/// intervals [from, to].  G is frozen at substep midpoints with the density
/// interpolated linearly between its samples.  Unitary in the L2 Gram inner
/// product up to solver roundoff.  Entry 0 of the result is psi0 itself.
std::vector<CMat> propagate(const GalerkinBasis& basis,
                            const ExternalPotential& ext,
                            const HartreeTable& table,
                            const DensityTrajectory& rho, const CMat& psi0,
                            int from, int to, const PropagatorConfig& cfg);

/// Full-horizon propagation wrapped as a Trajectory.
Trajectory propagate_full(const GalerkinBasis& basis,
                          const ExternalPotential& ext,
                          const HartreeTable& table,
                          const DensityTrajectory& rho, const CMat& psi0,
                          const PropagatorConfig& cfg);

/// Cached one-interval flow maps: step[j] maps states at sample j to
/// sample j+1.  Identical substep arithmetic to propagate().
struct FlowMaps {
  TimeGrid grid;
  std::vector<CMat> step;
};

FlowMaps build_flow_maps(const GalerkinBasis& basis,
                         const ExternalPotential& ext,
                         const HartreeTable& table,
                         const DensityTrajectory& rho,
                         const PropagatorConfig& cfg);

std::vector<CMat> states_from_maps(const FlowMaps& maps, const CMat& psi0);

/// H^1_0 norm at sample t_idx of the defect in the two-density evolution
/// identity: the difference of the two propagated states minus (i/hbar)
/// times the trapezoid Duhamel integral of U1(t,s)[V1 - V2]U2(s,0)psi0.
/// Zero when the densities coincide or the coupling vanishes; otherwise
/// second order in the time resolution.
double evolution_identity_residual(const GalerkinBasis& basis,
                                   const ExternalPotential& ext,
                                   const HartreeTable& table,
                                   const DensityTrajectory& rho1,
                                   const DensityTrajectory& rho2,
                                   const CMat& psi0, int t_idx,
                                   const PropagatorConfig& cfg);

}  // namespace fgal
