#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mmimo/config.hpp"

namespace mmimo {

/// Fitted parameters per topology, keyed by link label (F11, F12, ...).
struct FitTableRow {
    double d = 0, h = 0, r_r = 0, D = 0;
    std::string link;
    ModelParams params;
    FitDiagnostics diagnostics;
};

/// Particle-level characterization: one CDF CSV per topology (all four
/// links, long format) plus a molecule-conservation summary.
void cmd_characterize(const ExperimentConfig& config,
                      const std::filesystem::path& out_dir, unsigned workers);

/// Fits every CDF CSV in `cdf_dir`; writes fit_table.csv and the
/// own-link fit_grid.csv.
void cmd_fit(const ExperimentConfig& config, const std::filesystem::path& cdf_dir,
             const std::filesystem::path& out_dir);

/// SIR curves over the configured t_s grid for every topology in the fit
/// table.
void cmd_sir(const ExperimentConfig& config, const std::filesystem::path& fit_table,
             const std::filesystem::path& out_dir);

/// BER sweeps over Q1 and t_s for the configured detectors; consumes the
/// fit table of the selected (first) topology.
void cmd_ber(const ExperimentConfig& config, const std::filesystem::path& fit_table,
             const std::filesystem::path& out_dir);

/// Empirical threshold sweep curves for the configured detectors.
void cmd_sweep_thresholds(const ExperimentConfig& config,
                          const std::filesystem::path& fit_table,
                          const std::filesystem::path& out_dir);

/// Reads fit_table.csv back.
std::vector<FitTableRow> read_fit_table(const std::filesystem::path& path);

/// Builds the ChannelModel for a topology from fit-table rows (F11 own,
/// F12 cross).
ChannelModel model_from_rows(const Topology& topology,
                             const std::vector<FitTableRow>& rows);

}  // namespace mmimo
