#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "mmimo/rng.hpp"
#include "mmimo/topology.hpp"

namespace mmimo {

/// How absorption is detected within a time step: end-of-step position test,
/// or chord intersection of the segment between successive positions
/// (catches pass-throughs, hit time interpolated along the segment).
enum class AbsorptionMode { discrete, chord };

struct SimParams {
    std::uint32_t n_molecules = 100000;
    double dt = 1e-4;      // s
    double t_end = 10.0;   // s
    std::uint64_t seed = 0;
    int emitter = 1;       // Tx index
    AbsorptionMode absorption = AbsorptionMode::chord;

    /// Far-field acceleration: molecules far from both bulges take larger
    /// Brownian steps (still exact increments), capped so that a
    /// safety-factor multiple of the step spread stays below the distance
    /// to the nearest surface. dt is the near-field floor.
    bool far_field_accel = false;
    double accel_safety = 5.0;
    double accel_max_dt = 0.05;

    /// Disables the cross bulge (keeps only the emitter's own bulge);
    /// reduces the setup to the SISO closed-form case.
    bool single_sphere = false;

    unsigned workers = 1;
};

struct HitRecord {
    std::uint32_t molecule_id = 0;
    int absorbed_at = 0;   // bulge index 1 or 2, 0 if never absorbed
    double hit_time = 0.0; // valid only when absorbed_at != 0
};

struct EmpiricalCdf {
    LinkId link;
    Eigen::ArrayXd times;
    Eigen::ArrayXd values;
    std::uint32_t n_total = 0;
};

/// Brownian one-shot release of n_molecules from the emitter at t = 0.
/// Deterministic for a given (topology, params) regardless of worker count:
/// every molecule owns an RNG substream keyed by its id.
std::vector<HitRecord> run_one_shot(const Topology& topology, const SimParams& params);

/// Advances one position by independent N(0, 2 D dt) increments per axis.
inline Eigen::Vector3d step(const Eigen::Vector3d& position, double dt, double D,
                            Rng& rng) {
    const double sigma = std::sqrt(2.0 * D * dt);
    return position + sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
}

/// Empirical hitting CDFs per bulge on the given sorted time grid.
/// records come from a single emitter; n_total is the emitted count.
std::array<EmpiricalCdf, 2> estimate_cdf(const std::vector<HitRecord>& records,
                                         const Eigen::ArrayXd& time_grid,
                                         std::uint32_t n_total, int emitter);

}  // namespace mmimo
