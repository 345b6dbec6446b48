#include "fgal/derivative.hpp"

#include <cmath>
#include <random>

namespace fgal {
namespace {

CMat project_l2(const DerivativeContext& ctx, const CMat& field) {
  const GalerkinBasis& basis = *ctx.basis;
  const SpatialDomain& dom = *basis.dom;
  CMat rhs(basis.dim, field.cols());
  rhs.real() = basis.fields.transpose() *
               (dom.weights.asDiagonal() * field.real()).eval();
  rhs.imag() = basis.fields.transpose() *
               (dom.weights.asDiagonal() * field.imag()).eval();
  CMat out(basis.dim, field.cols());
  out.real() = ctx.l2_solver.solve(rhs.real().eval());
  out.imag() = ctx.l2_solver.solve(rhs.imag().eval());
  return out;
}

}  // namespace

DerivativeContext make_derivative_context(const GalerkinBasis& basis,
                                          const ExternalPotential& ext,
                                          const HartreeTable& table,
                                          Trajectory psi, const CMat& psi0,
                                          const PropagatorConfig& cfg) {
  if (psi.basis != &basis)
    throw NumericalError("derivative context: trajectory basis mismatch");
  if (psi0.rows() != basis.dim || psi0.cols() != psi.orbitals)
    throw NumericalError("derivative context: initial state shape mismatch");
  DerivativeContext ctx;
  ctx.basis = &basis;
  ctx.ext = &ext;
  ctx.table = &table;
  ctx.prop = cfg;
  ctx.psi = std::move(psi);
  ctx.psi0 = psi0;
  DensityTrajectory rho = density_from_trajectory(ctx.psi);
  ctx.maps = build_flow_maps(basis, ext, table, rho, cfg);
  ctx.inner = states_from_maps(ctx.maps, psi0);
  ctx.psi_fields.reserve(ctx.psi.c.size());
  ctx.inner_fields.reserve(ctx.inner.size());
  for (const CMat& c : ctx.psi.c)
    ctx.psi_fields.push_back(synthesize_values(basis, c));
  for (const CMat& c : ctx.inner)
    ctx.inner_fields.push_back(synthesize_values(basis, c));
  ctx.l2_solver = Eigen::LLT<RMat>(basis.gram_l2);
  if (ctx.l2_solver.info() != Eigen::Success)
    throw NumericalError("derivative context: L2 Gram factorization failed");
  return ctx;
}

Trajectory apply_Kn_prime(const DerivativeContext& ctx,
                          const Trajectory& omega) {
  const GalerkinBasis& basis = *ctx.basis;
  if (omega.basis != &basis)
    throw NumericalError("apply_Kn_prime: direction basis mismatch");
  if (omega.orbitals != ctx.psi.orbitals ||
      omega.c.size() != ctx.psi.c.size())
    throw NumericalError("apply_Kn_prime: direction shape mismatch");
  const int samples = ctx.psi.grid.samples;
  const int orbitals = ctx.psi.orbitals;
  const double half_dt = 0.5 * ctx.psi.grid.dt();
  const Complex factor(0.0, -2.0 / ctx.prop.hbar);

  Trajectory out = zero_trajectory(basis, ctx.psi.grid, orbitals);

  // Bracket at sample j: L2 projection of (mu_j * W) eta_j with
  // mu_j = sum_k Re(conj(psi_k) omega_k).  Zero directions are skipped so
  // unit probes cost a single convolution.
  auto bracket = [&](int j) -> CMat {
    if (omega.c[j].isZero(0.0)) return CMat::Zero(basis.dim, orbitals);
    CMat om_field = synthesize_values(basis, omega.c[j]);
    RVec mu = RVec::Zero(basis.dom->size());
    for (int k = 0; k < orbitals; ++k)
      mu += ctx.psi_fields[j].col(k).real().cwiseProduct(om_field.col(k).real()) +
            ctx.psi_fields[j].col(k).imag().cwiseProduct(om_field.col(k).imag());
    if (mu.isZero(0.0)) return CMat::Zero(basis.dim, orbitals);
    RVec g = ctx.table->convolve(mu);
    CMat prod(g.size(), orbitals);
    prod.real() = g.asDiagonal() * ctx.inner_fields[j].real();
    prod.imag() = g.asDiagonal() * ctx.inner_fields[j].imag();
    return project_l2(ctx, prod);
  };

  CMat integral = CMat::Zero(basis.dim, orbitals);
  CMat b_prev = bracket(0);
  for (int j = 1; j <= samples; ++j) {
    CMat b_cur = bracket(j);
    integral = ctx.maps.step[j - 1] * (integral + half_dt * b_prev) +
               half_dt * b_cur;
    out.c[j] = factor * integral;
    b_prev = std::move(b_cur);
  }
  return out;
}

Trajectory apply_Kn_prime(const GalerkinBasis& basis,
                          const ExternalPotential& ext,
                          const HartreeTable& table, const Trajectory& psi,
                          const Trajectory& omega, const CMat& psi0,
                          const PropagatorConfig& cfg) {
  DerivativeContext ctx =
      make_derivative_context(basis, ext, table, psi, psi0, cfg);
  return apply_Kn_prime(ctx, omega);
}

RVec realify(const Trajectory& traj) {
  const int dim = traj.basis->dim;
  const int n = traj.orbitals;
  const int samples = static_cast<int>(traj.c.size());
  RVec v(2 * dim * n * samples);
  int p = 0;
  for (int j = 0; j < samples; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < dim; ++i) {
        v[p++] = traj.c[j](i, k).real();
        v[p++] = traj.c[j](i, k).imag();
      }
  return v;
}

Trajectory unrealify(const GalerkinBasis& basis, const TimeGrid& grid,
                     int orbitals, const RVec& v) {
  Trajectory traj = zero_trajectory(basis, grid, orbitals);
  if (v.size() != 2 * basis.dim * orbitals * (grid.samples + 1))
    throw NumericalError("unrealify: coordinate length mismatch");
  int p = 0;
  for (int j = 0; j <= grid.samples; ++j)
    for (int k = 0; k < orbitals; ++k)
      for (int i = 0; i < basis.dim; ++i) {
        traj.c[j](i, k) = Complex(v[p], v[p + 1]);
        p += 2;
      }
  return traj;
}

RealLinearOperator build_operator(const DerivativeContext& ctx, int dim_cap) {
  const GalerkinBasis& basis = *ctx.basis;
  const int dim = basis.dim;
  const int orbitals = ctx.psi.orbitals;
  const int samples = ctx.psi.grid.samples + 1;
  const long d = 2L * dim * orbitals * samples;
  if (d > dim_cap)
    throw ConfigError("operator dimension " + std::to_string(d) +
                      " exceeds the configured cap");
  RealLinearOperator op;
  op.basis = &basis;
  op.grid = ctx.psi.grid;
  op.orbitals = orbitals;
  op.matrix.resize(d, d);
  Trajectory probe = zero_trajectory(basis, ctx.psi.grid, orbitals);
  int col = 0;
  for (int j = 0; j < samples; ++j)
    for (int k = 0; k < orbitals; ++k)
      for (int i = 0; i < dim; ++i)
        for (int part = 0; part < 2; ++part) {
          probe.c[j](i, k) = part == 0 ? Complex(1, 0) : Complex(0, 1);
          op.matrix.col(col++) = realify(apply_Kn_prime(ctx, probe));
          probe.c[j](i, k) = 0.0;
        }
  return op;
}

double operator_norm_power(const RMat& m, int iterations, double tol) {
  const int d = static_cast<int>(m.cols());
  RVec v(d);
  for (int i = 0; i < d; ++i) v[i] = 1.0 + 0.01 * std::sin(1.0 + i);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    RVec w = m.transpose() * (m * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    double next = std::sqrt(nw);
    if (it > 0 && std::abs(next - sigma) <= tol * std::max(1.0, sigma)) {
      sigma = next;
      break;
    }
    sigma = next;
    v = std::move(w);
  }
  return sigma;
}

double invertibility_margin(const RealLinearOperator& op) {
  RMat a = RMat::Identity(op.matrix.rows(), op.matrix.cols()) - op.matrix;
  Eigen::BDCSVD<RMat> svd(a);
  return svd.singularValues().tail(1)(0);
}

Trajectory unit_ball_draw(const GalerkinBasis& basis, const TimeGrid& grid,
                          int orbitals, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Trajectory t = zero_trajectory(basis, grid, orbitals);
  for (CMat& s : t.c) {
    for (int k = 0; k < orbitals; ++k)
      for (int i = 0; i < basis.dim; ++i)
        s(i, k) = Complex(gauss(rng), gauss(rng));
    double nrm = s.norm();
    if (nrm > 0.0) s /= nrm;
  }
  return t;
}

std::vector<std::pair<int, double>> dispersion_estimate(
    const std::vector<const GalerkinBasis*>& bases,
    const DerivativeContext& ref_ctx, int samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("dispersion sample count must be positive");
  const GalerkinBasis& ref = *ref_ctx.basis;
  std::vector<std::pair<int, double>> est;
  est.reserve(bases.size());
  for (const GalerkinBasis* b : bases) {
    if (b->dom != ref.dom || b->dim > ref.dim)
      throw NumericalError("dispersion: basis is not nested in the reference");
    est.emplace_back(b->dim, 0.0);
  }
  for (int s = 0; s < samples; ++s) {
    Trajectory omega = unit_ball_draw(ref, ref_ctx.psi.grid,
                                      ref_ctx.psi.orbitals, seed + 977 * s);
    Trajectory phi = apply_Kn_prime(ref_ctx, omega);
    for (size_t bi = 0; bi < bases.size(); ++bi) {
      const int n = bases[bi]->dim;
      double sup = 0.0;
      for (const CMat& c : phi.c)
        sup = std::max(sup, c.bottomRows(ref.dim - n).norm());
      est[bi].second = std::max(est[bi].second, sup);
    }
  }
  return est;
}

}  // namespace fgal
