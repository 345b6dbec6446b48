#include "fgal/potentials.hpp"

#include <cmath>
#include <numbers>

namespace fgal {

RVec ExternalPotential::eval(const SpatialDomain& dom, double t) const {
  const int m = dom.size();
  if (preset == Preset::Zero) return RVec::Zero(m);
  const double pi = std::numbers::pi;
  double drive = 1.0;
  if (preset == Preset::DrivenWell) drive = 1.0 + alpha * std::sin(omega * t);
  RVec v(m);
  for (int i = 0; i < m; ++i) {
    double s = std::sin(pi * dom.nodes[i] / dom.length);
    v[i] = v0 * drive * std::pow(s * s, shape);
  }
  return v;
}

double HartreeKernel::cutoff(double s) const {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  auto h = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  return h(2.0 - s) / (h(2.0 - s) + h(s - 1.0));
}

double HartreeKernel::value(double xi) const {
  double s = std::abs(xi) / truncation;
  double chi = cutoff(s);
  if (chi == 0.0) return 0.0;
  return coupling * chi / std::sqrt(xi * xi + softening * softening);
}

void check_kernel(const HartreeKernel& kernel, const SpatialDomain& dom) {
  if (!(kernel.softening > 0.0))
    throw ConfigError("kernel softening must be positive");
  if (!(kernel.coupling >= 0.0))
    throw ConfigError("kernel coupling must be nonnegative");
  if (!(kernel.truncation >= dom.length))
    throw ConfigError("kernel truncation radius below the domain diameter");
}

RVec hartree_convolve(const HartreeKernel& kernel, const SpatialDomain& dom,
                      const RVec& rho) {
  check_kernel(kernel, dom);
  const int m = dom.size();
  if (rho.size() != m) throw NumericalError("hartree_convolve: length mismatch");
  RVec out(m);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j)
      acc += dom.weights[j] * kernel.value(dom.nodes[i] - dom.nodes[j]) * rho[j];
    out[i] = acc;
  }
  return out;
}

RVec HartreeTable::convolve(const RVec& rho) const {
  if (rho.size() != wkernel.cols())
    throw NumericalError("HartreeTable: length mismatch");
  return wkernel * rho;
}

HartreeTable make_hartree_table(const SpatialDomain& dom,
                                const HartreeKernel& kernel) {
  check_kernel(kernel, dom);
  const int m = dom.size();
  HartreeTable table;
  table.dom = &dom;
  table.wkernel.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      table.wkernel(i, j) =
          dom.weights[j] * kernel.value(dom.nodes[i] - dom.nodes[j]);
  return table;
}

DensityTrajectory density_from_trajectory(const Trajectory& traj) {
  DensityTrajectory d;
  d.grid = traj.grid;
  d.rho.reserve(traj.c.size());
  for (const CMat& coeff : traj.c) {
    CMat vals = synthesize_values(*traj.basis, coeff);
    d.rho.push_back(vals.cwiseAbs2().rowwise().sum());
  }
  return d;
}

DensityTrajectory zero_density(const SpatialDomain& dom, const TimeGrid& grid) {
  DensityTrajectory d;
  d.grid = grid;
  d.rho.assign(grid.samples + 1, RVec::Zero(dom.size()));
  return d;
}

RVec effective_potential(const ExternalPotential& ext,
                         const HartreeKernel& kernel, const SpatialDomain& dom,
                         const RVec& rho, double t) {
  return ext.eval(dom, t) + hartree_convolve(kernel, dom, rho);
}

double lipschitz_ratio(const HartreeKernel& kernel, const Trajectory& psi1,
                       const Trajectory& psi2, const Trajectory& probe) {
  const SpatialDomain& dom = *psi1.basis->dom;
  double denom_traj = traj_dist(psi1, psi2);
  if (denom_traj == 0.0)
    throw NumericalError("lipschitz_ratio: psi1 equals psi2");
  double denom_probe = traj_norm(probe);
  if (denom_probe == 0.0)
    throw NumericalError("lipschitz_ratio: zero probe");
  DensityTrajectory r1 = density_from_trajectory(psi1);
  DensityTrajectory r2 = density_from_trajectory(psi2);
  double sup = 0.0;
  for (size_t j = 0; j < r1.rho.size(); ++j) {
    RVec dv = hartree_convolve(kernel, dom, r1.rho[j]) -
              hartree_convolve(kernel, dom, r2.rho[j]);
    CMat pv = synthesize_values(*probe.basis, probe.c[j]);
    double acc = 0.0;
    for (int k = 0; k < probe.orbitals; ++k) {
      CVec prod = dv.cwiseProduct(pv.col(k).real()).cast<Complex>();
      prod.imag() = dv.cwiseProduct(pv.col(k).imag());
      CVec grad = fd_derivative(dom, prod);
      acc += (prod.cwiseAbs2() + grad.cwiseAbs2()).dot(dom.weights);
    }
    sup = std::max(sup, std::sqrt(acc));
  }
  return sup / (denom_traj * denom_probe);
}

}  // namespace fgal
