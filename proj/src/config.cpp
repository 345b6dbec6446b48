#include "fgal/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace fgal {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  size_t used = 0;
  double d;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': invalid number '" + v + "'");
  }
  if (used != v.size())
    throw ConfigError("config key '" + key + "': invalid number '" + v + "'");
  return d;
}

long parse_int(const std::string& key, const std::string& v) {
  size_t used = 0;
  long n;
  try {
    n = std::stol(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': invalid integer '" + v + "'");
  }
  if (used != v.size())
    throw ConfigError("config key '" + key + "': invalid integer '" + v + "'");
  return n;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config key '" + key + "': empty list entry");
    out.push_back(static_cast<int>(parse_int(key, item)));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

struct KeyBinding {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, KeyBinding> bindings() {
  std::map<std::string, KeyBinding> b;
  auto dbl = [&](const std::string& key, double ExperimentConfig::*field) {
    b[key] = {[field](ExperimentConfig& c, const std::string& k,
                      const std::string& v) { c.*field = parse_double(k, v); },
              [field](const ExperimentConfig& c) { return fmt(c.*field); }};
  };
  auto integer = [&](const std::string& key, int ExperimentConfig::*field) {
    b[key] = {[field](ExperimentConfig& c, const std::string& k,
                      const std::string& v) {
                c.*field = static_cast<int>(parse_int(k, v));
              },
              [field](const ExperimentConfig& c) {
                return std::to_string(c.*field);
              }};
  };
  auto str = [&](const std::string& key, std::string ExperimentConfig::*field) {
    b[key] = {[field](ExperimentConfig& c, const std::string&,
                      const std::string& v) { c.*field = v; },
              [field](const ExperimentConfig& c) { return c.*field; }};
  };
  dbl("domain.L", &ExperimentConfig::length);
  integer("domain.M", &ExperimentConfig::quad_nodes);
  dbl("time.T0", &ExperimentConfig::horizon);
  integer("time.S", &ExperimentConfig::samples);
  integer("time.substeps", &ExperimentConfig::substeps);
  dbl("physics.hbar", &ExperimentConfig::hbar);
  dbl("physics.mass", &ExperimentConfig::mass);
  integer("physics.orbitals", &ExperimentConfig::orbitals);
  str("physics.initial", &ExperimentConfig::initial);
  str("potential.preset", &ExperimentConfig::preset);
  dbl("potential.V0", &ExperimentConfig::v0);
  dbl("potential.alpha", &ExperimentConfig::alpha);
  dbl("potential.omega_d", &ExperimentConfig::omega_d);
  dbl("potential.shape", &ExperimentConfig::shape);
  dbl("potential.kernel_a", &ExperimentConfig::kernel_a);
  dbl("potential.kernel_R", &ExperimentConfig::kernel_r);
  dbl("potential.lambda", &ExperimentConfig::lambda);
  b["sweep.n"] = {[](ExperimentConfig& c, const std::string& k,
                     const std::string& v) { c.sweep_n = parse_int_list(k, v); },
                  [](const ExperimentConfig& c) {
                    std::string s;
                    for (size_t i = 0; i < c.sweep_n.size(); ++i)
                      s += (i ? "," : "") + std::to_string(c.sweep_n[i]);
                    return s;
                  }};
  integer("sweep.nref_mult", &ExperimentConfig::nref_mult);
  dbl("fixed_point.tol", &ExperimentConfig::fp_tol);
  integer("fixed_point.max_iter", &ExperimentConfig::fp_max_iter);
  dbl("fixed_point.theta", &ExperimentConfig::fp_theta);
  dbl("fixed_point.ref_tol", &ExperimentConfig::ref_tol);
  integer("fixed_point.ref_substeps_mult", &ExperimentConfig::ref_substeps_mult);
  integer("derivative.dim_cap", &ExperimentConfig::dim_cap);
  integer("derivative.samples", &ExperimentConfig::dispersion_samples);
  integer("derivative.probes", &ExperimentConfig::probes);
  integer("derivative.margin_n", &ExperimentConfig::margin_n);
  integer("derivative.check_s_mult", &ExperimentConfig::check_s_mult);
  b["derivative.seed"] = {
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.seed = static_cast<std::uint64_t>(parse_int(k, v));
      },
      [](const ExperimentConfig& c) { return std::to_string(c.seed); }};
  str("output.dir", &ExperimentConfig::out_dir);
  str("output.format", &ExperimentConfig::format);
  return b;
}

}  // namespace

int ExperimentConfig::n_max() const {
  return *std::max_element(sweep_n.begin(), sweep_n.end());
}

int ExperimentConfig::n_ref() const { return nref_mult * n_max(); }

ExternalPotential ExperimentConfig::external() const {
  ExternalPotential ext;
  if (preset == "zero")
    ext.preset = ExternalPotential::Preset::Zero;
  else if (preset == "static-well")
    ext.preset = ExternalPotential::Preset::StaticWell;
  else if (preset == "driven-well")
    ext.preset = ExternalPotential::Preset::DrivenWell;
  else
    throw ConfigError("config key 'potential.preset': unknown preset '" +
                      preset + "'");
  ext.v0 = v0;
  ext.alpha = alpha;
  ext.omega = omega_d;
  ext.shape = shape;
  return ext;
}

HartreeKernel ExperimentConfig::kernel() const {
  return HartreeKernel{kernel_a, kernel_r, lambda};
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

void validate(const ExperimentConfig& cfg) {
  if (!(cfg.length > 0.0)) throw ConfigError("config key 'domain.L': must be positive");
  if (cfg.quad_nodes < 8) throw ConfigError("config key 'domain.M': too few nodes");
  if (!(cfg.horizon > 0.0)) throw ConfigError("config key 'time.T0': must be positive");
  if (cfg.samples < 1) throw ConfigError("config key 'time.S': must be positive");
  if (cfg.substeps < 1) throw ConfigError("config key 'time.substeps': must be positive");
  if (!(cfg.hbar > 0.0)) throw ConfigError("config key 'physics.hbar': must be positive");
  if (!(cfg.mass > 0.0)) throw ConfigError("config key 'physics.mass': must be positive");
  if (cfg.orbitals < 1) throw ConfigError("config key 'physics.orbitals': must be positive");
  if (cfg.initial != "bump" && cfg.initial != "sine-mix")
    throw ConfigError("config key 'physics.initial': unknown preset '" +
                      cfg.initial + "'");
  (void)cfg.external();
  if (!(cfg.kernel_a > 0.0))
    throw ConfigError("config key 'potential.kernel_a': must be positive");
  if (!(cfg.kernel_r >= cfg.length))
    throw ConfigError("config key 'potential.kernel_R': below domain length");
  if (!(cfg.lambda >= 0.0))
    throw ConfigError("config key 'potential.lambda': must be nonnegative");
  if (cfg.sweep_n.empty()) throw ConfigError("config key 'sweep.n': empty");
  for (size_t i = 0; i < cfg.sweep_n.size(); ++i) {
    if (cfg.sweep_n[i] < 1)
      throw ConfigError("config key 'sweep.n': dimensions must be positive");
    if (i && cfg.sweep_n[i] <= cfg.sweep_n[i - 1])
      throw ConfigError("config key 'sweep.n': must be strictly increasing");
  }
  if (cfg.nref_mult < 4)
    throw ConfigError("config key 'sweep.nref_mult': reference refinement below 4");
  if (cfg.quad_nodes < 4 * cfg.n_ref())
    throw ConfigError("config key 'domain.M': below 4x the reference dimension");
  if (!(cfg.fp_tol > 0.0)) throw ConfigError("config key 'fixed_point.tol': must be positive");
  if (cfg.fp_max_iter < 1)
    throw ConfigError("config key 'fixed_point.max_iter': must be positive");
  if (!(cfg.fp_theta > 0.0 && cfg.fp_theta <= 1.0))
    throw ConfigError("config key 'fixed_point.theta': must lie in (0, 1]");
  if (!(cfg.ref_tol > 0.0))
    throw ConfigError("config key 'fixed_point.ref_tol': must be positive");
  if (cfg.ref_substeps_mult < 1)
    throw ConfigError("config key 'fixed_point.ref_substeps_mult': must be positive");
  if (cfg.dim_cap < 2) throw ConfigError("config key 'derivative.dim_cap': too small");
  if (cfg.dispersion_samples < 1)
    throw ConfigError("config key 'derivative.samples': must be positive");
  if (cfg.probes < 1) throw ConfigError("config key 'derivative.probes': must be positive");
  if (cfg.margin_n < 1)
    throw ConfigError("config key 'derivative.margin_n': must be positive");
  if (cfg.check_s_mult < 1)
    throw ConfigError("config key 'derivative.check_s_mult': must be positive");
  if (cfg.format != "csv" && cfg.format != "both")
    throw ConfigError("config key 'output.format': expected 'csv' or 'both'");
  if (cfg.out_dir.empty()) throw ConfigError("config key 'output.dir': empty");
}

ExperimentConfig load_config(const std::string& path_or_default) {
  if (path_or_default == "default") {
    ExperimentConfig cfg = default_config();
    validate(cfg);
    return cfg;
  }
  std::ifstream in(path_or_default);
  if (!in)
    throw ConfigError("cannot open config file '" + path_or_default + "'");
  auto binds = bindings();
  ExperimentConfig cfg;
  std::map<std::string, bool> seen;
  for (auto& [key, _] : binds) seen[key] = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = binds.find(key);
    if (it == binds.end())
      throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, key, value);
    seen[key] = true;
  }
  for (auto& [key, was_seen] : seen)
    if (!was_seen) throw ConfigError("missing config key '" + key + "'");
  validate(cfg);
  return cfg;
}

std::string config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (auto& [key, bind] : bindings())
    out += key + " = " + bind.get(cfg) + "\n";
  return out;
}

std::vector<Field> initial_fields(const ExperimentConfig& cfg,
                                  const SpatialDomain& dom) {
  const double pi = std::numbers::pi;
  const double L = dom.length;
  const int m = dom.size();
  std::vector<Field> fields;
  fields.reserve(cfg.orbitals);
  for (int k = 0; k < cfg.orbitals; ++k) {
    Field f;
    f.values.resize(m);
    f.deriv.resize(m);
    if (cfg.initial == "bump") {
      // Orbital 0: x^2 (L-x)^2.  Later orbitals multiply in sine factors so
      // the orbitals stay distinct while remaining smooth Dirichlet data.
      for (int i = 0; i < m; ++i) {
        double x = dom.nodes[i];
        double bump = x * x * (L - x) * (L - x);
        double dbump = 2.0 * x * (L - x) * (L - 2.0 * x);
        if (k == 0) {
          f.values[i] = bump;
          f.deriv[i] = dbump;
        } else {
          double s = std::sin(k * pi * x / L);
          double ds = (k * pi / L) * std::cos(k * pi * x / L);
          f.values[i] = bump * s;
          f.deriv[i] = dbump * s + bump * ds;
        }
      }
    } else {  // sine-mix: lowest two modes, weights varying per orbital
      double a = 1.0;
      double b = (k % 2 ? -1.0 : 1.0) * (0.5 + 0.3 * k);
      for (int i = 0; i < m; ++i) {
        double x = dom.nodes[i];
        f.values[i] = a * std::sin(pi * x / L) + b * std::sin(2 * pi * x / L);
        f.deriv[i] = a * (pi / L) * std::cos(pi * x / L) +
                     b * (2 * pi / L) * std::cos(2 * pi * x / L);
      }
    }
    double nrm = std::sqrt(l2_inner(dom, f.values, f.values).real());
    f.values /= nrm;
    f.deriv /= nrm;
    fields.push_back(std::move(f));
  }
  return fields;
}

CMat initial_coefficients(const GalerkinBasis& basis,
                          const std::vector<Field>& fields) {
  CMat c(basis.dim, fields.size());
  for (size_t k = 0; k < fields.size(); ++k)
    c.col(k) = project_Qn(basis, fields[k]);
  return c;
}

double initial_h1_norm_sq(const SpatialDomain& dom,
                          const std::vector<Field>& fields) {
  double acc = 0.0;
  for (const Field& f : fields) acc += h10_inner(dom, f, f).real();
  return acc;
}

}  // namespace fgal
