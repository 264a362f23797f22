#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmimo/channel_model.hpp"
#include "mmimo/link_sim.hpp"
#include "mmimo/particle_sim.hpp"
#include "mmimo/topology.hpp"

namespace mmimo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TopologyConfig {
    std::vector<double> d{2.0};
    std::vector<double> h{2.0};
    std::vector<double> r_r{4.0};
    double D = 50.0;
    DistanceMode mode = DistanceMode::surface;

    /// Cartesian product of the d/h/r_r lists.
    std::vector<Topology> expand() const;
};

struct ParticleConfig {
    std::uint32_t n_molecules = 100000;
    double dt = 1e-4;
    double t_end = 10.0;
    int grid_points = 500;
    AbsorptionMode absorption = AbsorptionMode::chord;
    bool far_field_accel = true;
    double accel_safety = 5.0;
    double accel_max_dt = 0.05;
    bool single_sphere = false;
};

struct FitConfig {
    ModelParams initial_guess{1.0, 0.5, 0.5};
    bool fit_all_links = false;  // fit (2,2)/(2,1) separately instead of reusing
};

struct SweepConfig {
    std::vector<double> q1{100, 200, 300, 400, 500, 600};
    std::vector<double> t_s{0.05, 0.07, 0.09, 0.11, 0.13};
    std::vector<DetectorKind> detectors{DetectorKind::fixed, DetectorKind::adaptive,
                                        DetectorKind::practical_zf,
                                        DetectorKind::genie_zf};
    double threshold_lo = -1.0;
    double threshold_hi = 2.0;
    double threshold_step = 1e-3;

    /// Symbol durations for the SIR curves (the BER t_s list is separate).
    std::vector<double> sir_t_s = default_sir_grid();

    static std::vector<double> default_sir_grid() {
        std::vector<double> g;
        for (int i = 0; i <= 19; ++i) g.push_back(0.05 + 0.05 * i);
        return g;
    }
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    TopologyConfig topology;
    ParticleConfig particle;
    FitConfig fit;
    LinkConfig link;
    SweepConfig sweep;
    double eta_f = 0.2;

    /// Stable hash of the parsed configuration, embedded in every output
    /// file for provenance.
    std::uint64_t hash() const;
};

/// Parses the JSON config file. Unknown keys anywhere are errors; seed is
/// mandatory.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace mmimo
