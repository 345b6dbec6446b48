#pragma once

#include <vector>

#include "fgal/types.hpp"

namespace fgal {

/// Interval [0, L] carrying a composite Gauss-Legendre quadrature rule.
struct SpatialDomain {
  double length = 0.0;
  RVec nodes;    // strictly inside (0, L)
  RVec weights;  // positive, sum to L
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Builds [0, L] with at least min_nodes quadrature points, rounded up to
/// whole 12-point panels.
SpatialDomain make_domain(double length, int min_nodes);

/// Complex scalar field sampled on the quadrature grid together with its
/// spatial derivative samples.
struct Field {
  CVec values;
  CVec deriv;
};

Complex l2_inner(const SpatialDomain& dom, const CVec& f, const CVec& g);
Complex h10_inner(const SpatialDomain& dom, const Field& f, const Field& g);
double h10_norm(const SpatialDomain& dom, const Field& f);

/// Centered finite differences on the (nonuniform) quadrature grid.  Only
/// used for diagnostic norms of nodewise products whose exact derivative is
/// not available.
CVec fd_derivative(const SpatialDomain& dom, const CVec& v);

/// First n sine modes sin(i pi x / L) orthonormalized in H^1_0.  Bases built
/// on the same domain are nested: basis n equals the leading n columns of any
/// larger basis, so truncation realizes the orthogonal projection.
struct GalerkinBasis {
  const SpatialDomain* dom = nullptr;
  int dim = 0;
  RMat fields;     // M x dim
  RMat derivs;     // M x dim
  RMat gram_h1;    // equals the identity to quadrature accuracy
  RMat gram_l2;    // L2 Gram matrix, SPD
  RMat stiffness;  // integrals of f_i' f_j'
};

/// Fails if the quadrature resolution is below 4n (aliasing risk).
GalerkinBasis build_basis(const SpatialDomain& dom, int n);

/// H^1_0 expansion coefficients of a sampled field against the basis.
CVec project_Qn(const GalerkinBasis& basis, const Field& f);

/// Nodal values / derivatives of the fields with the given coefficient
/// columns (one column per orbital).
CMat synthesize_values(const GalerkinBasis& basis, const CMat& coeff);
CMat synthesize_derivs(const GalerkinBasis& basis, const CMat& coeff);

/// Uniformly sampled time interval [0, T0] with integrator substeps.
struct TimeGrid {
  double horizon = 0.0;
  int samples = 0;   // S; states live at the S+1 sample times
  int substeps = 1;  // integrator substeps per sample interval
  double dt() const { return horizon / samples; }
  double time(int j) const { return j == samples ? horizon : j * dt(); }
};

bool same_grid(const TimeGrid& a, const TimeGrid& b);

/// Coefficient states for N orbitals at the sample times: c[j] is dim x N.
struct Trajectory {
  const GalerkinBasis* basis = nullptr;
  TimeGrid grid;
  int orbitals = 0;
  std::vector<CMat> c;
};

Trajectory zero_trajectory(const GalerkinBasis& basis, const TimeGrid& grid,
                           int orbitals);

/// Samplewise orthogonal projection onto the target basis (same domain).
Trajectory project_Pn(const GalerkinBasis& target, const Trajectory& source);

/// Nested-basis fast paths: drop or zero-pad trailing coefficients.
Trajectory truncate_to(const GalerkinBasis& coarse, const Trajectory& source);
Trajectory inject_to(const GalerkinBasis& fine, const Trajectory& source);

/// sup over sample times of the H^1_0 norm summed over orbitals.
double traj_norm(const Trajectory& a);
double traj_dist(const Trajectory& a, const Trajectory& b);

}  // namespace fgal
