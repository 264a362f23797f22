#include "mmimo/particle_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace mmimo {
namespace {

struct Sphere {
    Eigen::Vector3d center;
    double radius_sq;
    int index;  // bulge index 1 or 2
};

// Earliest intersection fraction of segment p0 -> p0+d with the sphere,
// or a negative value if none.
double chord_hit(const Eigen::Vector3d& rel0, const Eigen::Vector3d& d, double a,
                 double radius_sq) {
    const double c0 = rel0.squaredNorm() - radius_sq;
    if (c0 <= 0.0) return 0.0;  // started inside (only possible at release)
    const double b = 2.0 * rel0.dot(d);
    if (c0 > std::abs(b)) return -1.0;  // segment cannot reach the surface
    const double disc = b * b - 4.0 * a * c0;
    if (disc < 0.0) return -1.0;
    const double alpha = (-b - std::sqrt(disc)) / (2.0 * a);
    return (alpha >= 0.0 && alpha <= 1.0) ? alpha : -1.0;
}

HitRecord simulate_molecule(const Topology& topo, const SimParams& p,
                            const std::vector<Sphere>& spheres, std::uint32_t id) {
    Rng rng(p.seed ^ (0x51f3ab5c9e1d04b7ULL * static_cast<std::uint64_t>(p.emitter)),
            id);
    Eigen::Vector3d pos = topo.tx_position(p.emitter);
    const double D = topo.diffusion();
    const double r = topo.radius();

    HitRecord rec;
    rec.molecule_id = id;

    double t = 0.0;
    while (t < p.t_end) {
        double dt = p.dt;
        if (p.far_field_accel) {
            double s = std::numeric_limits<double>::infinity();
            for (const auto& sph : spheres)
                s = std::min(s, (pos - sph.center).norm() - r);
            const double safe_dt =
                s * s / (6.0 * D * p.accel_safety * p.accel_safety);
            dt = std::clamp(safe_dt, p.dt, p.accel_max_dt);
        }
        dt = std::min(dt, p.t_end - t);

        const double sigma = std::sqrt(2.0 * D * dt);
        const Eigen::Vector3d disp(sigma * rng.normal(), sigma * rng.normal(),
                                   sigma * rng.normal());
        const double a = disp.squaredNorm();

        if (p.absorption == AbsorptionMode::chord && a > 0.0) {
            double best_alpha = 2.0;
            int best_bulge = 0;
            for (const auto& sph : spheres) {
                const double alpha = chord_hit(pos - sph.center, disp, a, sph.radius_sq);
                if (alpha >= 0.0 && alpha < best_alpha) {
                    best_alpha = alpha;
                    best_bulge = sph.index;
                }
            }
            if (best_bulge != 0) {
                rec.absorbed_at = best_bulge;
                rec.hit_time = t + best_alpha * dt;
                return rec;
            }
        } else {
            const Eigen::Vector3d end = pos + disp;
            for (const auto& sph : spheres) {
                if ((end - sph.center).squaredNorm() <= sph.radius_sq) {
                    rec.absorbed_at = sph.index;
                    rec.hit_time = t + dt;
                    return rec;
                }
            }
        }
        pos += disp;
        t += dt;
    }
    return rec;
}

}  // namespace

std::vector<HitRecord> run_one_shot(const Topology& topology, const SimParams& params) {
    if (!(params.dt > 0.0)) throw std::domain_error("run_one_shot: dt must be positive");
    if (!(params.t_end >= params.dt))
        throw std::domain_error("run_one_shot: t_end must be >= dt");
    if (params.emitter != 1 && params.emitter != 2)
        throw std::domain_error("run_one_shot: emitter must be 1 or 2");

    const double r_sq = topology.radius() * topology.radius();
    std::vector<Sphere> spheres;
    spheres.push_back({topology.rx_center(params.emitter), r_sq, params.emitter});
    if (!params.single_sphere) {
        const int other = params.emitter == 1 ? 2 : 1;
        spheres.push_back({topology.rx_center(other), r_sq, other});
    }

    std::vector<HitRecord> records(params.n_molecules);
    const unsigned workers = std::max(1u, params.workers);
    if (workers == 1 || params.n_molecules < 2 * workers) {
        for (std::uint32_t i = 0; i < params.n_molecules; ++i)
            records[i] = simulate_molecule(topology, params, spheres, i);
    } else {
        std::vector<std::thread> pool;
        const std::uint32_t chunk = (params.n_molecules + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint32_t lo = w * chunk;
            const std::uint32_t hi = std::min(params.n_molecules, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::uint32_t i = lo; i < hi; ++i)
                    records[i] = simulate_molecule(topology, params, spheres, i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return records;
}

std::array<EmpiricalCdf, 2> estimate_cdf(const std::vector<HitRecord>& records,
                                         const Eigen::ArrayXd& time_grid,
                                         std::uint32_t n_total, int emitter) {
    for (Eigen::Index i = 0; i + 1 < time_grid.size(); ++i)
        if (time_grid[i] > time_grid[i + 1])
            throw std::invalid_argument("estimate_cdf: time grid must be sorted");
    if (time_grid.size() > 0 && time_grid[0] < 0.0)
        throw std::invalid_argument("estimate_cdf: time grid must start at t >= 0");

    std::array<std::vector<double>, 2> hit_times;
    for (const auto& rec : records)
        if (rec.absorbed_at == 1 || rec.absorbed_at == 2)
            hit_times[rec.absorbed_at - 1].push_back(rec.hit_time);

    std::array<EmpiricalCdf, 2> out;
    for (int bulge = 1; bulge <= 2; ++bulge) {
        auto& times = hit_times[bulge - 1];
        std::sort(times.begin(), times.end());
        EmpiricalCdf cdf;
        cdf.link = LinkId{bulge, emitter};
        cdf.times = time_grid;
        cdf.values.resize(time_grid.size());
        cdf.n_total = n_total;
        for (Eigen::Index i = 0; i < time_grid.size(); ++i) {
            const auto it = std::upper_bound(times.begin(), times.end(), time_grid[i]);
            cdf.values[i] = n_total == 0
                                ? 0.0
                                : static_cast<double>(it - times.begin()) /
                                      static_cast<double>(n_total);
        }
        out[bulge - 1] = cdf;
    }
    return out;
}

}  // namespace mmimo
