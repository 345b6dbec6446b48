#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fgal/evolution.hpp"
#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// Everything fixed for the derivative of the solution map at one base
/// trajectory: cached flow maps for its density, the propagated initial
/// state (inner leg), synthesized nodal fields, and the L2 projector.
struct DerivativeContext {
  const GalerkinBasis* basis = nullptr;
  const ExternalPotential* ext = nullptr;
  const HartreeTable* table = nullptr;
  PropagatorConfig prop;
  Trajectory psi;                     // base point
  CMat psi0;                          // initial coefficients
  FlowMaps maps;                      // for rho = |psi|^2
  std::vector<CMat> inner;            // U(t_j, 0) psi0 coefficients
  std::vector<CMat> psi_fields;       // nodal values of psi per sample
  std::vector<CMat> inner_fields;     // nodal values of the inner leg
  Eigen::LLT<RMat> l2_solver;
};

DerivativeContext make_derivative_context(const GalerkinBasis& basis,
                                          const ExternalPotential& ext,
                                          const HartreeTable& table,
                                          Trajectory psi, const CMat& psi0,
                                          const PropagatorConfig& cfg);

/// Directional derivative of the solution map at the context's base point:
/// a real-linear map in omega, evaluated by the trapezoid Duhamel rule over
/// the sample times with the cached flow maps.  Sample 0 of the image is 0.
Trajectory apply_Kn_prime(const DerivativeContext& ctx,
                          const Trajectory& omega);

/// Convenience overload that builds the context on the fly.
Trajectory apply_Kn_prime(const GalerkinBasis& basis,
                          const ExternalPotential& ext,
                          const HartreeTable& table, const Trajectory& psi,
                          const Trajectory& omega, const CMat& psi0,
                          const PropagatorConfig& cfg);

/// Dense real matrix acting on realified trajectory coordinates
/// (sample-major, then orbital, then basis index, then re/im).
struct RealLinearOperator {
  const GalerkinBasis* basis = nullptr;
  TimeGrid grid;
  int orbitals = 0;
  RMat matrix;
};

RVec realify(const Trajectory& traj);
Trajectory unrealify(const GalerkinBasis& basis, const TimeGrid& grid,
                     int orbitals, const RVec& v);

/// Column-by-column realification of the derivative map.  Fails if the
/// realified dimension 2 N k (S+1) exceeds dim_cap.
RealLinearOperator build_operator(const DerivativeContext& ctx, int dim_cap);

/// Largest singular value estimate by power iteration on A^T A.
double operator_norm_power(const RMat& m, int iterations = 20,
                           double tol = 1e-8);

/// Smallest singular value of I - A.
double invertibility_margin(const RealLinearOperator& op);

/// For each basis, sup over seeded unit-ball draws omega of
/// ||phi - P_n phi|| with phi the derivative image of omega at the reference
/// context.  A sampled lower bound; exact draws are shared across bases.
std::vector<std::pair<int, double>> dispersion_estimate(
    const std::vector<const GalerkinBasis*>& bases,
    const DerivativeContext& ref_ctx, int samples, std::uint64_t seed);

/// Seeded trajectory draw with every sample normalized to unit H^1_0 norm.
Trajectory unit_ball_draw(const GalerkinBasis& basis, const TimeGrid& grid,
                          int orbitals, std::uint64_t seed);

}  // namespace fgal
