#include <doctest.h>

#include <cmath>

#include "mmimo/channel_model.hpp"
#include "mmimo/particle_sim.hpp"

using namespace mmimo;

namespace {
SimParams base_params(std::uint64_t seed, std::uint32_t n) {
    SimParams p;
    p.n_molecules = n;
    p.dt = 1e-4;
    p.t_end = 1.0;
    p.seed = seed;
    p.emitter = 1;
    return p;
}
}  // namespace

TEST_CASE("step displacement statistics") {
    const auto topo = make_topology(2, 2, 4, 50);
    Rng rng(99, 0);
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();

    SUBCASE("per-axis std at D=50, dt=1e-4 is 0.1") {
        CHECK(std::sqrt(2 * 50 * 1e-4) == doctest::Approx(0.1));
    }
    SUBCASE("sample variance over 1e5 steps within 3 SE of 2 D dt") {
        const int n = 100000;
        const double dt = 1e-4;
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d next = step(pos, dt, topo.diffusion(), rng);
            const double dx = next.x() - pos.x();
            sum += dx;
            sum2 += dx * dx;
        }
        const double var = sum2 / n - (sum / n) * (sum / n);
        const double expected = 2 * topo.diffusion() * dt;
        const double se = expected * std::sqrt(2.0 / n);
        CHECK(std::abs(var - expected) < 3 * se);
    }
    SUBCASE("dt -> 0 leaves the position unchanged") {
        const Eigen::Vector3d next = step(pos, 0.0, topo.diffusion(), rng);
        CHECK((next - pos).norm() == 0.0);
    }
}

TEST_CASE("run_one_shot basics") {
    const auto topo = make_topology(2, 2, 4, 50);

    SUBCASE("zero molecules give an empty record set") {
        auto p = base_params(1, 0);
        CHECK(run_one_shot(topo, p).empty());
    }
    SUBCASE("molecule conservation and determinism") {
        auto p = base_params(7, 2000);
        const auto recs = run_one_shot(topo, p);
        REQUIRE(recs.size() == 2000);
        int own = 0, cross = 0, free_count = 0;
        for (const auto& r : recs) {
            if (r.absorbed_at == 1) ++own;
            else if (r.absorbed_at == 2) ++cross;
            else ++free_count;
            if (r.absorbed_at != 0) {
                CHECK(r.hit_time > 0.0);
                CHECK(r.hit_time <= p.t_end);
            }
        }
        CHECK(own + cross + free_count == 2000);
        CHECK(own > cross);  // own bulge shadows the cross one

        const auto again = run_one_shot(topo, p);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            CHECK(recs[i].absorbed_at == again[i].absorbed_at);
            CHECK(recs[i].hit_time == again[i].hit_time);
        }
    }
    SUBCASE("worker count does not change results") {
        auto p = base_params(7, 1000);
        const auto serial = run_one_shot(topo, p);
        p.workers = 4;
        const auto parallel = run_one_shot(topo, p);
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(serial[i].absorbed_at == parallel[i].absorbed_at);
            CHECK(serial[i].hit_time == parallel[i].hit_time);
        }
    }
    SUBCASE("invalid parameters rejected") {
        auto p = base_params(1, 10);
        p.dt = 0;
        CHECK_THROWS(run_one_shot(topo, p));
        p = base_params(1, 10);
        p.emitter = 3;
        CHECK_THROWS(run_one_shot(topo, p));
    }
}

TEST_CASE("single-sphere run tracks the closed form (reduced scale)") {
    // Reduced-scale version of the SISO oracle: the acceptance suite runs
    // the full-size configuration.
    const auto topo = make_topology(2, 2, 4, 50);
    auto p = base_params(21, 20000);
    p.single_sphere = true;
    p.t_end = 1.0;
    p.far_field_accel = true;
    const auto recs = run_one_shot(topo, p);
    int hits = 0;
    for (const auto& r : recs) hits += r.absorbed_at == 1;
    const double frac = static_cast<double>(hits) / p.n_molecules;
    const double expected = f_siso(1.0, 4, 2, 50);
    CHECK(frac == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("estimate_cdf") {
    const auto topo = make_topology(2, 2, 4, 50);
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(50, 0.02, 1.0);

    SUBCASE("no absorptions give all-zero CDFs") {
        std::vector<HitRecord> recs(10);
        const auto cdfs = estimate_cdf(recs, grid, 10, 1);
        CHECK(cdfs[0].values.maxCoeff() == 0.0);
        CHECK(cdfs[1].values.maxCoeff() == 0.0);
    }
    SUBCASE("all absorbed before the first grid point") {
        std::vector<HitRecord> recs;
        for (std::uint32_t i = 0; i < 5; ++i) recs.push_back({i, 1, 0.01});
        const auto cdfs = estimate_cdf(recs, grid, 10, 1);
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            CHECK(cdfs[0].values[i] == doctest::Approx(0.5));
    }
    SUBCASE("monotone non-decreasing and bounded") {
        auto p = base_params(3, 5000);
        const auto recs = run_one_shot(topo, p);
        const auto cdfs = estimate_cdf(recs, grid, p.n_molecules, 1);
        for (const auto& cdf : cdfs) {
            for (Eigen::Index i = 1; i < cdf.values.size(); ++i)
                CHECK(cdf.values[i] >= cdf.values[i - 1]);
            CHECK(cdf.values.maxCoeff() <= 1.0);
        }
        CHECK(cdfs[0].link == LinkId{1, 1});
        CHECK(cdfs[1].link == LinkId{2, 1});
    }
    SUBCASE("unsorted grid rejected") {
        Eigen::ArrayXd bad(3);
        bad << 0.5, 0.2, 0.9;
        CHECK_THROWS(estimate_cdf({}, bad, 1, 1));
    }
}

TEST_CASE("emitter symmetry within Monte Carlo error") {
    const auto topo = make_topology(2, 2, 4, 50);
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(20, 0.05, 1.0);
    auto p1 = base_params(5, 20000);
    p1.far_field_accel = true;
    auto p2 = p1;
    p2.emitter = 2;
    p2.seed = 6;  // independent sample
    const auto c1 = estimate_cdf(run_one_shot(topo, p1), grid, p1.n_molecules, 1);
    const auto c2 = estimate_cdf(run_one_shot(topo, p2), grid, p2.n_molecules, 2);
    // F11 vs F22 and F12 vs F21, 3-sigma binomial band per grid point.
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        for (int pair = 0; pair < 2; ++pair) {
            const double a = pair == 0 ? c1[0].values[i] : c1[1].values[i];
            const double b = pair == 0 ? c2[1].values[i] : c2[0].values[i];
            const double pbar = 0.5 * (a + b);
            const double se =
                std::sqrt(2.0 * std::max(pbar * (1 - pbar), 1e-9) / p1.n_molecules);
            CHECK(std::abs(a - b) < 3.5 * se);
        }
    }
}
