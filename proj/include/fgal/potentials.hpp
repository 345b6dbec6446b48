#pragma once

#include <vector>

#include "fgal/function_space.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// Time-dependent external potential, C^1 in time.  The well profile is
/// V0 * sin^2(pi x / L)^shape, optionally modulated by 1 + alpha sin(w t).
struct ExternalPotential {
  enum class Preset { Zero, StaticWell, DrivenWell };
  Preset preset = Preset::Zero;
  double v0 = 0.0;
  double alpha = 0.0;
  double omega = 0.0;
  double shape = 1.0;

  RVec eval(const SpatialDomain& dom, double t) const;
};

/// Softened interaction kernel coupling * chi(|xi|/R) / sqrt(xi^2 + a^2).
/// The smooth cutoff chi equals 1 up to R, so it is inactive for separations
/// inside the domain whenever R >= L.
struct HartreeKernel {
  double softening = 0.1;   // a > 0
  double truncation = 1.0;  // R, at least the domain diameter
  double coupling = 0.0;    // lambda >= 0

  double value(double xi) const;
  double cutoff(double s) const;  // chi: 1 on [0,1], 0 beyond 2, smooth
};

void check_kernel(const HartreeKernel& kernel, const SpatialDomain& dom);

/// Direct quadrature convolution (W * rho)(x_i); O(M^2).
RVec hartree_convolve(const HartreeKernel& kernel, const SpatialDomain& dom,
                      const RVec& rho);

/// Precomputed weighted kernel matrix for repeated convolutions against one
/// (domain, kernel) pair.
struct HartreeTable {
  const SpatialDomain* dom = nullptr;
  RMat wkernel;  // wkernel(i, j) = w_j W(x_i - x_j)

  RVec convolve(const RVec& rho) const;
};

HartreeTable make_hartree_table(const SpatialDomain& dom,
                                const HartreeKernel& kernel);

/// Nonnegative total density at the sample times.
struct DensityTrajectory {
  TimeGrid grid;
  std::vector<RVec> rho;
};

DensityTrajectory density_from_trajectory(const Trajectory& traj);
DensityTrajectory zero_density(const SpatialDomain& dom, const TimeGrid& grid);

/// V_ext(x, t) + (W * rho)(x); diagnostic path using the direct convolution.
RVec effective_potential(const ExternalPotential& ext,
                         const HartreeKernel& kernel, const SpatialDomain& dom,
                         const RVec& rho, double t);

/// sup_t ||(V_e(rho1) - V_e(rho2)) probe||_{H1} divided by
/// ||psi1 - psi2||_{C(J;H1)} sup_t ||probe||_{H1}.  Product norms use
/// finite-difference gradients on the grid.
double lipschitz_ratio(const HartreeKernel& kernel, const Trajectory& psi1,
                       const Trajectory& psi2, const Trajectory& probe);

}  // namespace fgal
