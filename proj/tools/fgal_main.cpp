#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "fgal/config.hpp"
#include "fgal/harness.hpp"
#include "fgal/report_io.hpp"

namespace {

void print_sweep(const fgal::SweepReport& rep) {
  std::printf("reference: n_ref=%d residual=%.3e iterations=%d\n", rep.n_ref,
              rep.ref_residual, rep.ref_iterations);
  for (const fgal::SweepRow& r : rep.rows) {
    if (r.failed) {
      std::printf("n=%-3d FAILED: %s\n", r.n, r.error.c_str());
      continue;
    }
    std::printf(
        "n=%-3d e_proj=%.3e e_init=%.3e e_fp=%.3e e_total=%.3e c_n=%.3e "
        "iters=%d contraction=%.3f\n",
        r.n, r.e_proj, r.e_init, r.e_fp, r.e_total, r.c_n, r.iters,
        r.contraction);
  }
}

void print_hypotheses(const fgal::SweepReport& rep) {
  std::printf("reference: n_ref=%d residual=%.3e iterations=%d\n", rep.n_ref,
              rep.ref_residual, rep.ref_iterations);
  for (const fgal::SweepRow& r : rep.rows) {
    if (r.failed) {
      std::printf("n=%-3d FAILED: %s\n", r.n, r.error.c_str());
      continue;
    }
    std::printf(
        "n=%-3d h3=%.3e h4=%.3e est.h5=%.3e h6=%.3e est.h7=%.3e "
        "est.h8=%.3e\n",
        r.n, r.h3, r.h4, r.h5, r.h6, r.h7, r.h8);
  }
}

bool any_failed(const fgal::SweepReport& rep) {
  for (const fgal::SweepRow& r : rep.rows)
    if (r.failed) return true;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin fixed-point study of a Hartree-coupled "
               "Schrodinger system"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path = "default";
  app.add_option("--config", config_path,
                 "config file path, or 'default' for the built-in scenario")
      ->capture_default_str();
  CLI::App* cmd_propagate = app.add_subcommand(
      "propagate", "norm conservation and propagator order study");
  CLI::App* cmd_fp = app.add_subcommand(
      "fixed-point", "Picard iteration record at the largest dimension");
  CLI::App* cmd_deriv = app.add_subcommand(
      "derivative-check",
      "finite-difference derivative validation and invertibility margin");
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "full convergence table over the n sweep");
  CLI::App* cmd_hyp = app.add_subcommand(
      "hypotheses", "hypothesis residual columns only (no coarse solves)");
  CLI::App* cmd_disp = app.add_subcommand(
      "dispersion", "projection-tail dispersion of the derivative images");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fgal::ExperimentConfig cfg = fgal::load_config(config_path);
    if (cmd_sweep->parsed()) {
      fgal::StudyContext sc = fgal::make_study_context(cfg);
      fgal::SweepReport rep = fgal::run_convergence_sweep(sc);
      fgal::write_report_files(cfg, "sweep", fgal::format_sweep_csv(rep),
                               fgal::format_sweep_json(cfg, rep));
      print_sweep(rep);
      if (any_failed(rep)) return 3;
    } else if (cmd_hyp->parsed()) {
      fgal::StudyContext sc = fgal::make_study_context(cfg);
      fgal::SweepReport rep = fgal::run_hypothesis_check(sc);
      fgal::write_report_files(cfg, "hypotheses",
                               fgal::format_hypotheses_csv(rep),
                               fgal::format_sweep_json(cfg, rep));
      print_hypotheses(rep);
      if (any_failed(rep)) return 3;
    } else if (cmd_disp->parsed()) {
      fgal::StudyContext sc = fgal::make_study_context(cfg);
      auto disp = fgal::run_dispersion(sc);
      fgal::write_report_files(cfg, "dispersion",
                               fgal::format_dispersion_csv(disp),
                               fgal::format_dispersion_json(cfg, disp));
      for (const auto& [n, value] : disp)
        std::printf("n=%-3d est.dispersion=%.6e\n", n, value);
    } else if (cmd_propagate->parsed()) {
      fgal::PropagationReport rep = fgal::run_propagation_study(cfg);
      std::printf("norm drift per unit time: %.3e\n", rep.drift_rate);
      std::printf(
          "eigenmode phase error: %.6e (substeps=%d) %.6e (substeps=%d) "
          "ratio=%.3f\n",
          rep.phase_err_coarse, cfg.substeps, rep.phase_err_fine,
          2 * cfg.substeps, rep.order_ratio);
    } else if (cmd_fp->parsed()) {
      fgal::FixedPointReport rep = fgal::run_fixed_point_study(cfg);
      std::printf("n=%d iterations=%d converged=%s\n", rep.n,
                  rep.log.iterations, rep.log.converged ? "yes" : "no");
      for (size_t i = 0; i < rep.log.residuals.size(); ++i) {
        double ratio = i < rep.log.ratios.size() ? rep.log.ratios[i] : 0.0;
        std::printf("iter=%-3zu residual=%.6e ratio=%.4f\n", i + 1,
                    rep.log.residuals[i], ratio);
      }
    } else if (cmd_deriv->parsed()) {
      fgal::DerivativeReport rep = fgal::run_derivative_check(cfg);
      bool ok = true;
      for (size_t p = 0; p < rep.slopes.size(); ++p) {
        std::printf("pair=%zu", p);
        for (size_t e = 0; e < rep.epsilons.size(); ++e)
          std::printf(" err(eps=%.0e)=%.3e", rep.epsilons[e],
                      rep.errors[p][e]);
        std::printf(" slope=%.3f\n", rep.slopes[p]);
        if (rep.slopes[p] < 0.8 || rep.slopes[p] > 1.2) ok = false;
      }
      std::printf(
          "margin(n=%d): smin(I-K')=%.4f est.norm=%.4f doubled-samples "
          "margin=%.4f\n",
          rep.margin_n, rep.margin, rep.op_norm, rep.margin_fine);
      if (!ok) {
        std::fprintf(stderr, "derivative check failed: slope outside "
                             "[0.8, 1.2]\n");
        return 3;
      }
    }
    return 0;
  } catch (const fgal::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const fgal::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const fgal::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
