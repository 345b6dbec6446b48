#include "fgal/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fgal {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json row_json(const SweepRow& r) {
  nlohmann::json j{{"n", r.n},
                   {"e_proj", r.e_proj},
                   {"e_init", r.e_init},
                   {"e_fp", r.e_fp},
                   {"e_total", r.e_total},
                   {"c_n", r.c_n},
                   {"iters", r.iters},
                   {"contraction", r.contraction},
                   {"h3", r.h3},
                   {"h4", r.h4},
                   {"h5", r.h5},
                   {"h6", r.h6},
                   {"h7", r.h7},
                   {"h8", r.h8}};
  if (r.failed) j["error"] = r.error;
  return j;
}

nlohmann::json report_head(const ExperimentConfig& cfg,
                           const SweepReport& rep) {
  return nlohmann::json{{"seed", cfg.seed},
                        {"n_ref", rep.n_ref},
                        {"ref_residual", rep.ref_residual},
                        {"ref_iterations", rep.ref_iterations},
                        {"config", config_text(cfg)}};
}

}  // namespace

std::string format_sweep_csv(const SweepReport& rep) {
  std::string out =
      "n,e_proj,e_init,e_fp,e_total,c_n,iters,contraction,h3,h4,h5,h6,h7,"
      "h8\n";
  for (const SweepRow& r : rep.rows) {
    out += std::to_string(r.n) + ',' + num(r.e_proj) + ',' + num(r.e_init) +
           ',' + num(r.e_fp) + ',' + num(r.e_total) + ',' + num(r.c_n) + ',' +
           std::to_string(r.iters) + ',' + num(r.contraction) + ',' +
           num(r.h3) + ',' + num(r.h4) + ',' + num(r.h5) + ',' + num(r.h6) +
           ',' + num(r.h7) + ',' + num(r.h8) + '\n';
  }
  return out;
}

std::string format_hypotheses_csv(const SweepReport& rep) {
  std::string out = "n,h3,h4,h5,h6,h7,h8\n";
  for (const SweepRow& r : rep.rows) {
    out += std::to_string(r.n) + ',' + num(r.h3) + ',' + num(r.h4) + ',' +
           num(r.h5) + ',' + num(r.h6) + ',' + num(r.h7) + ',' + num(r.h8) +
           '\n';
  }
  return out;
}

std::string format_dispersion_csv(
    const std::vector<std::pair<int, double>>& disp) {
  std::string out = "n,dispersion\n";
  for (const auto& [n, value] : disp)
    out += std::to_string(n) + ',' + num(value) + '\n';
  return out;
}

std::string format_sweep_json(const ExperimentConfig& cfg,
                              const SweepReport& rep) {
  nlohmann::json j = report_head(cfg, rep);
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : rep.rows) j["rows"].push_back(row_json(r));
  return j.dump(2) + "\n";
}

std::string format_dispersion_json(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<int, double>>& disp) {
  nlohmann::json j{{"seed", cfg.seed}, {"config", config_text(cfg)}};
  j["rows"] = nlohmann::json::array();
  for (const auto& [n, value] : disp)
    j["rows"].push_back({{"n", n}, {"dispersion", value}});
  return j.dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory '" +
                    target.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec)
    throw IoError("cannot rename '" + tmp.string() + "' to '" +
                  target.string() + "': " + ec.message());
}

void write_report_files(const ExperimentConfig& cfg, const std::string& stem,
                        const std::string& csv, const std::string& json) {
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  write_text_atomic((dir / (stem + ".csv")).string(), csv);
  if (cfg.format == "both" && !json.empty())
    write_text_atomic((dir / (stem + ".json")).string(), json);
}

}  // namespace fgal
