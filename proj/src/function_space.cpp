#include "fgal/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fgal {
namespace {

constexpr int kPanelOrder = 12;

// Nodes and weights of the p-point Gauss-Legendre rule on [-1, 1], by Newton
// iteration on the Legendre recurrence.
void gauss_legendre_unit(int p, std::vector<double>& x, std::vector<double>& w) {
  x.assign(p, 0.0);
  w.assign(p, 0.0);
  for (int i = 0; i < (p + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < p; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * t * p1 - k * p2) / (k + 1);
      }
      dp = p * (t * p0 - p1) / (t * t - 1.0);
      double step = p0 / dp;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = -t;
    x[p - 1 - i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    w[p - 1 - i] = w[i];
  }
}

double wdot(const SpatialDomain& dom, const RVec& a, const RVec& b) {
  return a.cwiseProduct(dom.weights).dot(b);
}

// Derivative weights of the quadratic through (xa, xb, xc) evaluated at xt.
void lagrange_deriv3(double xa, double xb, double xc, double xt, double& wa,
                     double& wb, double& wc) {
  wa = (2 * xt - xb - xc) / ((xa - xb) * (xa - xc));
  wb = (2 * xt - xa - xc) / ((xb - xa) * (xb - xc));
  wc = (2 * xt - xa - xb) / ((xc - xa) * (xc - xb));
}

void check_field(const SpatialDomain& dom, const Field& f, const char* who) {
  if (f.values.size() != dom.size() || f.deriv.size() != dom.size())
    throw NumericalError(std::string(who) + ": field length does not match grid");
}

}  // namespace

SpatialDomain make_domain(double length, int min_nodes) {
  if (!(length > 0.0)) throw ConfigError("domain length must be positive");
  if (min_nodes < 1) throw ConfigError("quadrature node count must be positive");
  int panels = (min_nodes + kPanelOrder - 1) / kPanelOrder;
  std::vector<double> gx, gw;
  gauss_legendre_unit(kPanelOrder, gx, gw);
  SpatialDomain dom;
  dom.length = length;
  const int m = panels * kPanelOrder;
  dom.nodes.resize(m);
  dom.weights.resize(m);
  const double h = length / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    for (int q = 0; q < kPanelOrder; ++q) {
      dom.nodes[p * kPanelOrder + q] = a + 0.5 * h * (gx[q] + 1.0);
      dom.weights[p * kPanelOrder + q] = 0.5 * h * gw[q];
    }
  }
  return dom;
}

Complex l2_inner(const SpatialDomain& dom, const CVec& f, const CVec& g) {
  if (f.size() != dom.size() || g.size() != dom.size())
    throw NumericalError("l2_inner: field length does not match grid");
  Complex acc = 0.0;
  for (int i = 0; i < dom.size(); ++i)
    acc += dom.weights[i] * f[i] * std::conj(g[i]);
  return acc;
}

Complex h10_inner(const SpatialDomain& dom, const Field& f, const Field& g) {
  check_field(dom, f, "h10_inner");
  check_field(dom, g, "h10_inner");
  Complex acc = 0.0;
  for (int i = 0; i < dom.size(); ++i)
    acc += dom.weights[i] * (f.values[i] * std::conj(g.values[i]) +
                             f.deriv[i] * std::conj(g.deriv[i]));
  return acc;
}

double h10_norm(const SpatialDomain& dom, const Field& f) {
  return std::sqrt(std::max(0.0, h10_inner(dom, f, f).real()));
}

CVec fd_derivative(const SpatialDomain& dom, const CVec& v) {
  const int m = dom.size();
  if (v.size() != m) throw NumericalError("fd_derivative: length mismatch");
  if (m < 3) throw NumericalError("fd_derivative: too few nodes");
  CVec d(m);
  const RVec& x = dom.nodes;
  double wa, wb, wc;
  for (int i = 0; i < m; ++i) {
    int a = std::clamp(i, 1, m - 2) - 1;
    lagrange_deriv3(x[a], x[a + 1], x[a + 2], x[i], wa, wb, wc);
    d[i] = wa * v[a] + wb * v[a + 1] + wc * v[a + 2];
  }
  return d;
}

GalerkinBasis build_basis(const SpatialDomain& dom, int n) {
  if (n < 1) throw ConfigError("basis dimension must be positive");
  if (dom.size() < 4 * n)
    throw ConfigError("quadrature resolution below 4n for basis dimension " +
                      std::to_string(n));
  const int m = dom.size();
  GalerkinBasis basis;
  basis.dom = &dom;
  basis.dim = n;
  basis.fields.resize(m, n);
  basis.derivs.resize(m, n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    const double k = (i + 1) * pi / dom.length;
    basis.fields.col(i) = (k * dom.nodes.array()).sin();
    basis.derivs.col(i) = k * (k * dom.nodes.array()).cos();
  }
  // Gram-Schmidt in the H^1_0 inner product.  The raw sine modes are already
  // orthogonal, so this reduces to scaling plus rounding-level corrections,
  // and keeps the family nested across n.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double r = wdot(dom, basis.fields.col(i), basis.fields.col(j)) +
                 wdot(dom, basis.derivs.col(i), basis.derivs.col(j));
      basis.fields.col(i) -= r * basis.fields.col(j);
      basis.derivs.col(i) -= r * basis.derivs.col(j);
    }
    double nrm = std::sqrt(wdot(dom, basis.fields.col(i), basis.fields.col(i)) +
                           wdot(dom, basis.derivs.col(i), basis.derivs.col(i)));
    if (!(nrm > 0.0)) throw NumericalError("degenerate basis mode");
    basis.fields.col(i) /= nrm;
    basis.derivs.col(i) /= nrm;
  }
  RMat wf = dom.weights.asDiagonal() * basis.fields;
  RMat wd = dom.weights.asDiagonal() * basis.derivs;
  basis.gram_l2 = basis.fields.transpose() * wf;
  basis.stiffness = basis.derivs.transpose() * wd;
  basis.gram_h1 = basis.gram_l2 + basis.stiffness;
  return basis;
}

CVec project_Qn(const GalerkinBasis& basis, const Field& f) {
  const SpatialDomain& dom = *basis.dom;
  check_field(dom, f, "project_Qn");
  auto part = [&](const RMat& b, const CVec& v) {
    RVec re = b.transpose() * dom.weights.cwiseProduct(v.real());
    RVec im = b.transpose() * dom.weights.cwiseProduct(v.imag());
    CVec out(b.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  };
  return part(basis.fields, f.values) + part(basis.derivs, f.deriv);
}

namespace {
CMat real_times_complex(const RMat& b, const CMat& c) {
  CMat out(b.rows(), c.cols());
  out.real() = b * c.real();
  out.imag() = b * c.imag();
  return out;
}
}  // namespace

CMat synthesize_values(const GalerkinBasis& basis, const CMat& coeff) {
  if (coeff.rows() != basis.dim)
    throw NumericalError("synthesize: coefficient count does not match basis");
  return real_times_complex(basis.fields, coeff);
}

CMat synthesize_derivs(const GalerkinBasis& basis, const CMat& coeff) {
  if (coeff.rows() != basis.dim)
    throw NumericalError("synthesize: coefficient count does not match basis");
  return real_times_complex(basis.derivs, coeff);
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  return a.horizon == b.horizon && a.samples == b.samples &&
         a.substeps == b.substeps;
}

Trajectory zero_trajectory(const GalerkinBasis& basis, const TimeGrid& grid,
                           int orbitals) {
  Trajectory t;
  t.basis = &basis;
  t.grid = grid;
  t.orbitals = orbitals;
  t.c.assign(grid.samples + 1, CMat::Zero(basis.dim, orbitals));
  return t;
}

Trajectory project_Pn(const GalerkinBasis& target, const Trajectory& source) {
  if (source.basis == nullptr) throw NumericalError("project_Pn: empty source");
  if (target.dom != source.basis->dom)
    throw NumericalError("project_Pn: domain mismatch");
  Trajectory out = zero_trajectory(target, source.grid, source.orbitals);
  const SpatialDomain& dom = *target.dom;
  for (size_t j = 0; j < source.c.size(); ++j) {
    CMat vals = synthesize_values(*source.basis, source.c[j]);
    CMat ders = synthesize_derivs(*source.basis, source.c[j]);
    auto part = [&](const RMat& b, const CMat& v) {
      CMat r(b.cols(), v.cols());
      r.real() = b.transpose() * (dom.weights.asDiagonal() * v.real()).eval();
      r.imag() = b.transpose() * (dom.weights.asDiagonal() * v.imag()).eval();
      return r;
    };
    out.c[j] = part(target.fields, vals) + part(target.derivs, ders);
  }
  return out;
}

Trajectory truncate_to(const GalerkinBasis& coarse, const Trajectory& source) {
  if (source.basis == nullptr || coarse.dom != source.basis->dom ||
      coarse.dim > source.basis->dim)
    throw NumericalError("truncate_to: bases are not nested");
  Trajectory out = zero_trajectory(coarse, source.grid, source.orbitals);
  for (size_t j = 0; j < source.c.size(); ++j)
    out.c[j] = source.c[j].topRows(coarse.dim);
  return out;
}

Trajectory inject_to(const GalerkinBasis& fine, const Trajectory& source) {
  if (source.basis == nullptr || fine.dom != source.basis->dom ||
      fine.dim < source.basis->dim)
    throw NumericalError("inject_to: bases are not nested");
  Trajectory out = zero_trajectory(fine, source.grid, source.orbitals);
  for (size_t j = 0; j < source.c.size(); ++j)
    out.c[j].topRows(source.basis->dim) = source.c[j];
  return out;
}

double traj_norm(const Trajectory& a) {
  double sup = 0.0;
  for (const CMat& s : a.c) sup = std::max(sup, s.norm());
  return sup;
}

double traj_dist(const Trajectory& a, const Trajectory& b) {
  if (a.c.size() != b.c.size() || a.orbitals != b.orbitals ||
      a.basis->dim != b.basis->dim)
    throw NumericalError("traj_dist: trajectory shapes differ");
  double sup = 0.0;
  for (size_t j = 0; j < a.c.size(); ++j)
    sup = std::max(sup, (a.c[j] - b.c[j]).norm());
  return sup;
}

}  // namespace fgal
