#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fgal/config.hpp"
#include "fgal/harness.hpp"

namespace fgal {

/// Canonical CSV: fixed header, 12 significant digits, LF endings.
std::string format_sweep_csv(const SweepReport& rep);
std::string format_hypotheses_csv(const SweepReport& rep);
std::string format_dispersion_csv(
    const std::vector<std::pair<int, double>>& disp);

/// JSON mirrors carry the seed, the full config echo, and reference-quality
/// fields so every output is auditable on its own.
std::string format_sweep_json(const ExperimentConfig& cfg,
                              const SweepReport& rep);
std::string format_dispersion_json(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<int, double>>& disp);

/// Creates parent directories, writes to a temporary file, then renames.
void write_text_atomic(const std::string& path, const std::string& content);

/// Writes <out_dir>/<stem>.csv and, if the format asks, <stem>.json.
void write_report_files(const ExperimentConfig& cfg, const std::string& stem,
                        const std::string& csv, const std::string& json);

}  // namespace fgal
