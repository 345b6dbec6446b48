#include "fgal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <thread>

namespace fgal {
namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  return x;
}

// sup over samples of || a - P_n b || with a living on the first n modes of
// b's basis; the tail of b contributes fully.
double dist_against_tail(const Trajectory& coarse, const Trajectory& fine,
                         int n) {
  double sup = 0.0;
  const int tail = static_cast<int>(fine.c[0].rows()) - n;
  for (size_t j = 0; j < fine.c.size(); ++j) {
    double d2 = (coarse.c[j] - fine.c[j].topRows(n)).squaredNorm() +
                fine.c[j].bottomRows(tail).squaredNorm();
    sup = std::max(sup, std::sqrt(d2));
  }
  return sup;
}

// sup over samples of the projection tail of a reference-basis trajectory.
double tail_norm(const Trajectory& traj, int n) {
  double sup = 0.0;
  const int tail = static_cast<int>(traj.c[0].rows()) - n;
  for (const CMat& c : traj.c) sup = std::max(sup, c.bottomRows(tail).norm());
  return sup;
}

Trajectory shifted(const Trajectory& base, const Trajectory& dir,
                   double scale) {
  Trajectory out = base;
  for (size_t j = 0; j < out.c.size(); ++j) out.c[j] += scale * dir.c[j];
  return out;
}

double l2_norm(const GalerkinBasis& basis, const CVec& c) {
  RVec re = c.real();
  RVec im = c.imag();
  return std::sqrt(re.dot(basis.gram_l2 * re) + im.dot(basis.gram_l2 * im));
}

// Least-squares slope of log(err) against log(eps).
double loglog_slope(const std::vector<double>& eps,
                    const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(eps.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log(eps[i]);
    double y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void run_pool(int tasks, const std::function<void(int)>& work) {
  int width = std::min(worker_count(), tasks);
  if (width <= 1) {
    for (int i = 0; i < tasks; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (int w = 0; w < width; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1))
        work(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("FGAL_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

StudyContext make_study_context(const ExperimentConfig& cfg) {
  validate(cfg);
  StudyContext sc;
  sc.cfg = cfg;
  sc.dom = std::make_unique<SpatialDomain>(
      make_domain(cfg.length, cfg.quad_nodes));
  sc.ext = std::make_unique<ExternalPotential>(cfg.external());
  HartreeKernel kernel = cfg.kernel();
  check_kernel(kernel, *sc.dom);
  sc.table = std::make_unique<HartreeTable>(make_hartree_table(*sc.dom, kernel));
  sc.ref_basis = std::make_unique<GalerkinBasis>(
      build_basis(*sc.dom, cfg.n_ref()));
  for (int n : cfg.sweep_n)
    sc.bases.push_back(std::make_unique<GalerkinBasis>(
        build_basis(*sc.dom, n)));
  sc.psi0_fields = initial_fields(cfg, *sc.dom);
  sc.psi0_h1_sq = initial_h1_norm_sq(*sc.dom, sc.psi0_fields);
  sc.psi0_ref = initial_coefficients(*sc.ref_basis, sc.psi0_fields);
  sc.ref = solve_reference(*sc.ref_basis, *sc.ext, *sc.table, sc.psi0_ref,
                           cfg.grid(), cfg.ref_fp(), cfg.ref_prop());
  sc.k_ref = apply_K_ref(*sc.ref_basis, *sc.ext, *sc.table, sc.ref, sc.ref.psi);
  sc.ref_ctx = std::make_unique<DerivativeContext>(make_derivative_context(
      *sc.ref_basis, *sc.ext, *sc.table, sc.ref.psi, sc.ref.psi0,
      sc.ref.prop));
  sc.probes.reserve(cfg.probes);
  sc.probe_images.reserve(cfg.probes);
  for (int p = 0; p < cfg.probes; ++p) {
    sc.probes.push_back(unit_ball_draw(*sc.ref_basis, cfg.grid(),
                                       cfg.orbitals, mix(cfg.seed, 7000 + p)));
    sc.probe_images.push_back(apply_Kn_prime(*sc.ref_ctx, sc.probes.back()));
  }
  return sc;
}

void measure_hypotheses(const StudyContext& sc, int sweep_index,
                        SweepRow& row) {
  const ExperimentConfig& cfg = sc.cfg;
  const int n = cfg.sweep_n[sweep_index];
  const GalerkinBasis& bn = *sc.bases[sweep_index];
  const Trajectory& psi = sc.ref.psi;
  row.n = n;

  row.h3 = tail_norm(psi, n);
  row.e_proj = row.h3;

  const Trajectory pn_psi = truncate_to(bn, psi);
  const CMat psi0_n = sc.psi0_ref.topRows(n);

  // Solution map applied to the projected reference, on the reference basis.
  const Trajectory a = apply_K_ref(*sc.ref_basis, *sc.ext, *sc.table, sc.ref,
                                   pn_psi);
  row.h4 = dist_against_tail(truncate_to(bn, a), sc.k_ref, n);

  // Discrete solution map at the projected reference.
  const Trajectory kn_img = apply_Kn(bn, *sc.ext, *sc.table, pn_psi, psi0_n,
                                     cfg.prop());
  {
    double sup = 0.0;
    for (size_t j = 0; j < kn_img.c.size(); ++j)
      sup = std::max(sup,
                     (kn_img.c[j] - sc.k_ref.c[j].topRows(n)).norm());
    row.c_n = sup;
  }
  {
    double sup = 0.0;
    for (size_t j = 0; j < kn_img.c.size(); ++j)
      sup = std::max(sup, (kn_img.c[j] - a.c[j].topRows(n)).norm());
    row.h6 = sup;
  }

  // Derivative at the projected reference, lifted to the reference basis.
  DerivativeContext ctx_a = make_derivative_context(
      *sc.ref_basis, *sc.ext, *sc.table, inject_to(*sc.ref_basis, pn_psi),
      sc.ref.psi0, sc.ref.prop);
  // Derivative of the discrete map at the same base point.
  DerivativeContext ctx_b = make_derivative_context(bn, *sc.ext, *sc.table,
                                                    pn_psi, psi0_n,
                                                    cfg.prop());
  std::vector<Trajectory> coarse_probes;
  std::vector<double> coarse_norms;
  std::vector<Trajectory> coarse_images;
  for (const Trajectory& probe : sc.probes) {
    coarse_probes.push_back(truncate_to(bn, probe));
    coarse_norms.push_back(traj_norm(coarse_probes.back()));
    coarse_images.push_back(apply_Kn_prime(ctx_b, coarse_probes.back()));
  }

  double h5 = 0.0, h7 = 0.0;
  for (size_t p = 0; p < sc.probes.size(); ++p) {
    Trajectory img = apply_Kn_prime(ctx_a, sc.probes[p]);
    h5 = std::max(h5, dist_against_tail(truncate_to(bn, img),
                                        sc.probe_images[p], n));
    if (coarse_norms[p] > 1e-12) {
      Trajectory lifted = apply_Kn_prime(ctx_a,
                                         inject_to(*sc.ref_basis,
                                                   coarse_probes[p]));
      double sup = 0.0;
      for (size_t j = 0; j < lifted.c.size(); ++j)
        sup = std::max(sup, (coarse_images[p].c[j] -
                             lifted.c[j].topRows(n)).norm());
      h7 = std::max(h7, sup / coarse_norms[p]);
    }
  }
  row.h5 = h5;
  row.h7 = h7;

  // Equicontinuity probe over a ball whose radius tracks the projection
  // error, so the column inherits its decay.
  const double delta = std::max(row.h3, 1e-9);
  const int ball_draws = 3;
  double h8 = 0.0;
  for (int d = 0; d < ball_draws; ++d) {
    Trajectory draw = unit_ball_draw(bn, cfg.grid(), cfg.orbitals,
                                     mix(cfg.seed, 100 * n + d));
    Trajectory shifted_base = shifted(pn_psi, draw, delta);
    DerivativeContext ctx_d = make_derivative_context(bn, *sc.ext, *sc.table,
                                                      shifted_base, psi0_n,
                                                      cfg.prop());
    for (size_t p = 0; p < coarse_probes.size(); ++p) {
      if (coarse_norms[p] <= 1e-12) continue;
      Trajectory img = apply_Kn_prime(ctx_d, coarse_probes[p]);
      h8 = std::max(h8, traj_dist(img, coarse_images[p]) / coarse_norms[p]);
    }
  }
  row.h8 = h8;
}

namespace {

SweepReport sweep_common(const StudyContext& sc, bool with_fixed_points) {
  const ExperimentConfig& cfg = sc.cfg;
  SweepReport rep;
  rep.n_ref = sc.ref.n_ref;
  rep.ref_residual = sc.ref.residual;
  rep.ref_iterations = sc.ref.iterations;
  rep.rows.resize(cfg.sweep_n.size());
  run_pool(static_cast<int>(cfg.sweep_n.size()), [&](int i) {
    SweepRow& row = rep.rows[i];
    row.n = cfg.sweep_n[i];
    try {
      measure_hypotheses(sc, i, row);
      if (!with_fixed_points) return;
      const GalerkinBasis& bn = *sc.bases[i];
      const CMat psi0_n = sc.psi0_ref.topRows(row.n);
      auto [traj, log] = solve_fixed_point(bn, *sc.ext, *sc.table, psi0_n,
                                           cfg.grid(), cfg.fp(), cfg.prop());
      row.iters = log.iterations;
      row.contraction = log.max_ratio();
      row.e_fp = traj_dist(traj, truncate_to(bn, sc.ref.psi));
      row.e_total = dist_against_tail(traj, sc.ref.psi, row.n);
      row.e_init = std::sqrt(std::max(
          0.0, sc.psi0_h1_sq - psi0_n.squaredNorm()));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return rep;
}

}  // namespace

SweepReport run_convergence_sweep(const StudyContext& sc) {
  return sweep_common(sc, true);
}

SweepReport run_hypothesis_check(const StudyContext& sc) {
  return sweep_common(sc, false);
}

std::vector<std::pair<int, double>> run_dispersion(const StudyContext& sc) {
  std::vector<const GalerkinBasis*> bases;
  for (const auto& b : sc.bases) bases.push_back(b.get());
  return dispersion_estimate(bases, *sc.ref_ctx, sc.cfg.dispersion_samples,
                             sc.cfg.seed);
}

PropagationReport run_propagation_study(const ExperimentConfig& cfg) {
  validate(cfg);
  PropagationReport rep;
  SpatialDomain dom = make_domain(cfg.length, cfg.quad_nodes);
  ExternalPotential ext = cfg.external();
  HartreeKernel kernel = cfg.kernel();
  check_kernel(kernel, dom);
  HartreeTable table = make_hartree_table(dom, kernel);
  TimeGrid grid = cfg.grid();

  // Norm drift under the full self-coupled setup: propagate through the
  // density of the external-only evolution, then re-measure every orbital.
  {
    GalerkinBasis basis = build_basis(dom, cfg.n_max());
    std::vector<Field> fields = initial_fields(cfg, dom);
    CMat psi0 = initial_coefficients(basis, fields);
    DensityTrajectory rho0 = zero_density(dom, grid);
    Trajectory warm = propagate_full(basis, ext, table, rho0, psi0,
                                     cfg.prop());
    DensityTrajectory rho = density_from_trajectory(warm);
    Trajectory traj = propagate_full(basis, ext, table, rho, psi0,
                                     cfg.prop());
    RVec base_norm(cfg.orbitals);
    for (int k = 0; k < cfg.orbitals; ++k)
      base_norm[k] = l2_norm(basis, psi0.col(k));
    double worst = 0.0;
    for (const CMat& c : traj.c)
      for (int k = 0; k < cfg.orbitals; ++k)
        worst = std::max(worst,
                         std::abs(l2_norm(basis, c.col(k)) - base_norm[k]));
    rep.drift_rate = worst / grid.horizon;
  }

  // Phase accuracy on the exact lowest eigenmode of the free problem.
  {
    GalerkinBasis basis = build_basis(dom, 2);
    ExternalPotential free_ext;  // zero
    HartreeKernel off{cfg.kernel_a, cfg.kernel_r, 0.0};
    HartreeTable off_table = make_hartree_table(dom, off);
    CMat psi0 = CMat::Zero(2, 1);
    psi0(0, 0) = 1.0;
    DensityTrajectory rho0 = zero_density(dom, grid);
    const double pi = std::numbers::pi;
    const double e1 = cfg.hbar * cfg.hbar * pi * pi /
                      (2.0 * cfg.mass * cfg.length * cfg.length);
    auto phase_err = [&](int substeps) {
      PropagatorConfig prop{substeps, cfg.hbar, cfg.mass};
      Trajectory traj = propagate_full(basis, free_ext, off_table, rho0,
                                       psi0, prop);
      Complex amp = traj.c.back()(0, 0);
      Complex exact = std::exp(Complex(0.0, -e1 * grid.horizon / cfg.hbar));
      return std::abs(std::arg(amp * std::conj(exact)));
    };
    rep.phase_err_coarse = phase_err(cfg.substeps);
    rep.phase_err_fine = phase_err(2 * cfg.substeps);
    rep.order_ratio = rep.phase_err_coarse /
                      std::max(rep.phase_err_fine, 1e-300);
  }
  return rep;
}

FixedPointReport run_fixed_point_study(const ExperimentConfig& cfg) {
  validate(cfg);
  FixedPointReport rep;
  rep.n = cfg.n_max();
  SpatialDomain dom = make_domain(cfg.length, cfg.quad_nodes);
  ExternalPotential ext = cfg.external();
  HartreeKernel kernel = cfg.kernel();
  check_kernel(kernel, dom);
  HartreeTable table = make_hartree_table(dom, kernel);
  GalerkinBasis basis = build_basis(dom, rep.n);
  std::vector<Field> fields = initial_fields(cfg, dom);
  CMat psi0 = initial_coefficients(basis, fields);
  auto [traj, log] = solve_fixed_point(basis, ext, table, psi0, cfg.grid(),
                                       cfg.fp(), cfg.prop());
  (void)traj;
  rep.log = log;
  rep.final_residual = log.residuals.empty() ? 0.0 : log.residuals.back();
  return rep;
}

DerivativeReport run_derivative_check(const ExperimentConfig& cfg, int pairs) {
  validate(cfg);
  DerivativeReport rep;
  rep.epsilons = {1e-2, 1e-3, 1e-4};

  // Finite-difference pass on a deliberately small space with a fine sample
  // grid: the derivative quadrature lives on the sample times, so the
  // comparison floor scales with the sample spacing squared.
  {
    const int n = 4;
    SpatialDomain dom = make_domain(cfg.length, 120);
    ExternalPotential ext = cfg.external();
    HartreeKernel kernel = cfg.kernel();
    check_kernel(kernel, dom);
    HartreeTable table = make_hartree_table(dom, kernel);
    GalerkinBasis basis = build_basis(dom, n);
    TimeGrid grid{cfg.horizon, cfg.samples * cfg.check_s_mult, 2};
    PropagatorConfig prop{grid.substeps, cfg.hbar, cfg.mass};
    std::vector<Field> fields = initial_fields(cfg, dom);
    CMat psi0 = initial_coefficients(basis, fields);
    for (int p = 0; p < pairs; ++p) {
      Trajectory base = unit_ball_draw(basis, grid, cfg.orbitals,
                                       mix(cfg.seed, 300 + 2 * p));
      Trajectory dir = unit_ball_draw(basis, grid, cfg.orbitals,
                                      mix(cfg.seed, 301 + 2 * p));
      Trajectory k_base = apply_Kn(basis, ext, table, base, psi0, prop);
      Trajectory deriv = apply_Kn_prime(basis, ext, table, base, dir, psi0,
                                        prop);
      std::vector<double> errs;
      for (double eps : rep.epsilons) {
        Trajectory k_pert = apply_Kn(basis, ext, table,
                                     shifted(base, dir, eps), psi0, prop);
        Trajectory predicted = shifted(k_base, deriv, eps);
        errs.push_back(traj_dist(k_pert, predicted) / eps);
      }
      rep.errors.push_back(errs);
      rep.slopes.push_back(loglog_slope(rep.epsilons, errs));
    }
  }

  // Invertibility margin of I - K'_n at the self-consistent state, plus its
  // stability under doubling the sample count.
  {
    rep.margin_n = cfg.margin_n;
    SpatialDomain dom = make_domain(cfg.length, cfg.quad_nodes);
    ExternalPotential ext = cfg.external();
    HartreeKernel kernel = cfg.kernel();
    check_kernel(kernel, dom);
    HartreeTable table = make_hartree_table(dom, kernel);
    GalerkinBasis basis = build_basis(dom, cfg.margin_n);
    std::vector<Field> fields = initial_fields(cfg, dom);
    CMat psi0 = initial_coefficients(basis, fields);
    auto margin_at = [&](int samples) {
      TimeGrid grid{cfg.horizon, samples, cfg.substeps};
      PropagatorConfig prop{cfg.substeps, cfg.hbar, cfg.mass};
      auto [traj, log] = solve_fixed_point(basis, ext, table, psi0, grid,
                                           cfg.fp(), prop);
      (void)log;
      DerivativeContext ctx = make_derivative_context(basis, ext, table,
                                                      traj, psi0, prop);
      RealLinearOperator op = build_operator(ctx, cfg.dim_cap);
      if (samples == cfg.samples)
        rep.op_norm = operator_norm_power(op.matrix);
      return invertibility_margin(op);
    };
    rep.margin = margin_at(cfg.samples);
    rep.margin_fine = margin_at(2 * cfg.samples);
  }
  return rep;
}

IdentityReport run_identity_study(const ExperimentConfig& cfg) {
  validate(cfg);
  IdentityReport rep;
  const int n = 8;
  SpatialDomain dom = make_domain(cfg.length, cfg.quad_nodes);
  ExternalPotential ext = cfg.external();
  HartreeKernel kernel = cfg.kernel();
  check_kernel(kernel, dom);
  HartreeTable table = make_hartree_table(dom, kernel);
  GalerkinBasis basis = build_basis(dom, n);
  std::vector<Field> fields = initial_fields(cfg, dom);
  CMat psi0 = initial_coefficients(basis, fields);
  const double pi = std::numbers::pi;
  auto density_pair = [&](const TimeGrid& grid) {
    DensityTrajectory r1 = zero_density(dom, grid);
    DensityTrajectory r2 = zero_density(dom, grid);
    RVec s1 = (pi * dom.nodes.array() / cfg.length).sin().square().matrix();
    RVec s2 =
        (2 * pi * dom.nodes.array() / cfg.length).sin().square().matrix();
    for (int j = 0; j <= grid.samples; ++j) {
      double t = grid.time(j);
      r1.rho[j] = s1 * (1.0 + 0.3 * std::cos(3.0 * t));
      r2.rho[j] = r1.rho[j] + s2 * (0.3 + 0.15 * std::sin(2.0 * t));
    }
    return std::make_pair(r1, r2);
  };
  auto residual_at = [&](int samples, int substeps) {
    TimeGrid grid{cfg.horizon, samples, substeps};
    auto [r1, r2] = density_pair(grid);
    PropagatorConfig prop{substeps, cfg.hbar, cfg.mass};
    return evolution_identity_residual(basis, ext, table, r1, r2, psi0,
                                       grid.samples, prop);
  };
  // Elevated substeps keep the integrator error subordinate, so the
  // refinement ratio reflects the quadrature order of the identity itself.
  const int base_substeps = 4 * cfg.substeps;
  rep.residual_coarse = residual_at(cfg.samples, base_substeps);
  rep.residual_fine = residual_at(2 * cfg.samples, 2 * base_substeps);
  rep.ratio = rep.residual_coarse / std::max(rep.residual_fine, 1e-300);
  return rep;
}

}  // namespace fgal
