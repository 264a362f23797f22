#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "mmimo/pipelines.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2x2 molecular MIMO simulator and detection experiments"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the shared options after the subcommand too

    std::string config_path;
    std::string out_dir = "out";
    std::string mode;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    unsigned workers = 1;

    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed_override, "override config seed");
    app.add_option("--mode", mode, "channel mode: binomial-taps | multinomial");
    app.add_option("--workers", workers, "worker threads for particle simulation");

    std::string cdf_dir;
    std::string fit_table;

    auto* characterize = app.add_subcommand("characterize", "particle-level channel CDFs");
    auto* fit = app.add_subcommand("fit", "fit hitting-probability model to CDFs");
    fit->add_option("--cdf-dir", cdf_dir, "directory with cdf_*.csv files");
    auto* sir_cmd = app.add_subcommand("sir", "SIR curves over t_s");
    sir_cmd->add_option("--fit-table", fit_table, "fit_table.csv path");
    auto* ber = app.add_subcommand("ber", "BER sweeps for the four detectors");
    ber->add_option("--fit-table", fit_table, "fit_table.csv path");
    auto* sweep = app.add_subcommand("sweep-thresholds", "empirical threshold sweep");
    sweep->add_option("--fit-table", fit_table, "fit_table.csv path");

    CLI11_PARSE(app, argc, argv);
    has_seed_override = seed_opt->count() > 0;

    try {
        mmimo::ExperimentConfig cfg = mmimo::load_config(config_path);
        if (has_seed_override) {
            cfg.seed = seed_override;
            cfg.link.seed = seed_override;
        }
        if (!mode.empty()) {
            if (mode == "binomial-taps")
                cfg.link.channel_mode = mmimo::ChannelMode::binomial_taps;
            else if (mode == "multinomial")
                cfg.link.channel_mode = mmimo::ChannelMode::multinomial;
            else
                throw mmimo::ConfigError("--mode must be binomial-taps or multinomial");
        }

        const std::filesystem::path out(out_dir);
        if (cdf_dir.empty()) cdf_dir = out_dir;
        if (fit_table.empty()) fit_table = (out / "fit_table.csv").string();

        if (characterize->parsed()) {
            mmimo::cmd_characterize(cfg, out, workers);
        } else if (fit->parsed()) {
            mmimo::cmd_fit(cfg, cdf_dir, out);
        } else if (sir_cmd->parsed()) {
            mmimo::cmd_sir(cfg, fit_table, out);
        } else if (ber->parsed()) {
            mmimo::cmd_ber(cfg, fit_table, out);
        } else if (sweep->parsed()) {
            mmimo::cmd_sweep_thresholds(cfg, fit_table, out);
        }
    } catch (const mmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericError;
    }
    return 0;
}
