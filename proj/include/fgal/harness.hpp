#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fgal/config.hpp"
#include "fgal/derivative.hpp"
#include "fgal/evolution.hpp"
#include "fgal/fixed_point.hpp"
#include "fgal/function_space.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// One row of the convergence table.  All norms are sup-in-time H^1_0 norms;
/// errors compare against the reference-basis solution as continuum proxy.
/// h5, h7, h8 are sampled operator-norm estimates.
struct SweepRow {
  int n = 0;
  double e_proj = 0.0;   // reference solution minus its projection
  double e_init = 0.0;   // initial data minus its projection
  double e_fp = 0.0;     // fixed point minus projected reference
  double e_total = 0.0;  // fixed point minus reference
  double c_n = 0.0;      // consistency of the solution maps at the reference
  int iters = 0;
  double contraction = 0.0;  // worst observed residual ratio
  double h3 = 0.0;           // projection error of the solution
  double h4 = 0.0;           // solution-map commutation defect
  double h5 = 0.0;           // derivative continuity defect at the projection
  double h6 = 0.0;           // projected map vs. discrete map defect
  double h7 = 0.0;           // derivative consistency defect
  double h8 = 0.0;           // derivative equicontinuity over a shrinking ball
  bool failed = false;
  std::string error;
};

struct SweepReport {
  int n_ref = 0;
  double ref_residual = 0.0;
  int ref_iterations = 0;
  std::vector<SweepRow> rows;
};

/// Shared artifacts for one experiment: quadrature domain, nested bases,
/// kernel table, reference fixed point, cached reference-map image, and the
/// derivative context plus probe images at the reference solution.
struct StudyContext {
  ExperimentConfig cfg;
  // Heap-owned so cached contexts can hold stable pointers across moves.
  std::unique_ptr<SpatialDomain> dom;
  std::unique_ptr<ExternalPotential> ext;
  std::unique_ptr<HartreeTable> table;
  std::unique_ptr<GalerkinBasis> ref_basis;
  std::vector<std::unique_ptr<GalerkinBasis>> bases;  // parallel to cfg.sweep_n
  std::vector<Field> psi0_fields;
  double psi0_h1_sq = 0.0;  // squared H^1_0 norm of the analytic initial data
  CMat psi0_ref;
  ReferenceSolution ref;
  Trajectory k_ref;  // solution map applied once more to the reference
  std::unique_ptr<DerivativeContext> ref_ctx;
  std::vector<Trajectory> probes;        // shared unit draws, reference basis
  std::vector<Trajectory> probe_images;  // derivative images of the probes
};

/// Builds every shared artifact; the expensive step is the reference solve.
StudyContext make_study_context(const ExperimentConfig& cfg);

/// Fills the hypothesis columns h3..h8 and c_n of a row (no fixed point).
void measure_hypotheses(const StudyContext& sc, int sweep_index, SweepRow& row);

/// Full per-n table: fixed points, error decomposition, hypothesis columns.
/// Per-n numerical failures mark the row and the sweep continues.
SweepReport run_convergence_sweep(const StudyContext& sc);

/// Hypothesis columns only (no per-n fixed points).
SweepReport run_hypothesis_check(const StudyContext& sc);

/// Dispersion of the derivative at the reference solution per basis.
std::vector<std::pair<int, double>> run_dispersion(const StudyContext& sc);

/// Norm conservation and substep-halving order of the propagator.
struct PropagationReport {
  double drift_rate = 0.0;        // worst L2-norm drift per unit time
  double phase_err_coarse = 0.0;  // eigenmode phase error at cfg substeps
  double phase_err_fine = 0.0;    // same with substeps doubled
  double order_ratio = 0.0;       // coarse / fine, ~4 for second order
};

PropagationReport run_propagation_study(const ExperimentConfig& cfg);

/// Picard iteration record at the largest sweep dimension.
struct FixedPointReport {
  int n = 0;
  IterationLog log;
  double final_residual = 0.0;
};

FixedPointReport run_fixed_point_study(const ExperimentConfig& cfg);

/// Finite-difference validation of the derivative plus the invertibility
/// margin of I minus the derivative at a self-consistent state.
struct DerivativeReport {
  std::vector<double> slopes;       // log-log slope per (base, direction) pair
  std::vector<std::vector<double>> errors;  // per pair, per epsilon
  std::vector<double> epsilons;
  double margin = 0.0;         // smallest singular value of I - K'_n
  double margin_fine = 0.0;    // same with sample count doubled
  double op_norm = 0.0;        // power-iteration estimate of ||K'_n||
  int margin_n = 0;
};

DerivativeReport run_derivative_check(const ExperimentConfig& cfg, int pairs = 6);

/// Residual of the two-density evolution identity at one resolution and with
/// samples and substeps doubled; analytic smooth density pair.
struct IdentityReport {
  double residual_coarse = 0.0;
  double residual_fine = 0.0;
  double ratio = 0.0;
};

IdentityReport run_identity_study(const ExperimentConfig& cfg);

/// Worker-pool width: FGAL_THREADS if set, else hardware concurrency.
int worker_count();

}  // namespace fgal
