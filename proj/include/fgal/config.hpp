#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgal/fixed_point.hpp"
#include "fgal/potentials.hpp"
#include "fgal/types.hpp"

namespace fgal {

/// One flat experiment description.  Config files are `key = value` lines;
/// every key is required and unknown keys are rejected.
struct ExperimentConfig {
  // domain
  double length = 1.0;
  int quad_nodes = 1024;
  // time
  double horizon = 0.5;
  int samples = 32;
  int substeps = 4;
  // physics
  double hbar = 1.0;
  double mass = 1.0;
  int orbitals = 2;
  std::string initial = "bump";  // bump | sine-mix
  // potentials
  std::string preset = "driven-well";  // zero | static-well | driven-well
  double v0 = 1.0;
  double alpha = 0.5;
  double omega_d = 12.566370614359172;
  double shape = 1.0;
  double kernel_a = 0.1;
  double kernel_r = 1.0;
  double lambda = 0.1;
  // sweep
  std::vector<int> sweep_n = {4, 8, 12, 16};
  int nref_mult = 4;
  // fixed point
  double fp_tol = 1e-8;
  int fp_max_iter = 25;
  double fp_theta = 1.0;
  double ref_tol = 1e-10;
  int ref_substeps_mult = 1;
  // derivative
  int dim_cap = 8192;
  int dispersion_samples = 24;
  int probes = 8;
  int margin_n = 8;
  int check_s_mult = 16;
  std::uint64_t seed = 12345;
  // output
  std::string out_dir = "out";
  std::string format = "both";  // csv | both

  int n_ref() const;
  int n_max() const;
  TimeGrid grid() const { return TimeGrid{horizon, samples, substeps}; }
  ExternalPotential external() const;
  HartreeKernel kernel() const;
  PropagatorConfig prop() const { return PropagatorConfig{substeps, hbar, mass}; }
  PropagatorConfig ref_prop() const {
    return PropagatorConfig{substeps * ref_substeps_mult, hbar, mass};
  }
  FixedPointConfig fp() const { return FixedPointConfig{fp_tol, fp_max_iter, fp_theta}; }
  FixedPointConfig ref_fp() const {
    return FixedPointConfig{ref_tol, 2 * fp_max_iter, fp_theta};
  }
};

/// Built-in default scenario.
ExperimentConfig default_config();

/// Loads a config file; the literal name "default" yields default_config().
/// Missing or unknown keys raise ConfigError naming the key.
ExperimentConfig load_config(const std::string& path_or_default);

/// Serialization of every key, parseable by load_config.
std::string config_text(const ExperimentConfig& cfg);

/// Validates cross-field invariants (sweep ordering, resolution bounds, ...).
void validate(const ExperimentConfig& cfg);

/// Analytic initial fields for the configured preset, one per orbital,
/// L2-normalized.
std::vector<Field> initial_fields(const ExperimentConfig& cfg,
                                  const SpatialDomain& dom);

/// H^1_0-orthonormal coefficients of the initial fields on a basis.
CMat initial_coefficients(const GalerkinBasis& basis,
                          const std::vector<Field>& fields);

/// Squared H^1_0 norm of the analytic initial state (all orbitals).
double initial_h1_norm_sq(const SpatialDomain& dom,
                          const std::vector<Field>& fields);

}  // namespace fgal
