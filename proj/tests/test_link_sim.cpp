#include <doctest.h>

#include <cmath>

#include "mmimo/link_sim.hpp"

using namespace mmimo;

namespace {
ChannelModel selected_model() {
    return ChannelModel{make_topology(2, 2, 4, 50),
                        ModelParams{0.9155, 0.5236, 0.5476},
                        ModelParams{0.1534, 0.2780, 0.5363}};
}

LinkConfig small_config() {
    LinkConfig cfg;
    cfg.q1 = 500;
    cfg.t_s = 0.08;
    cfg.sigma_n_sq = 10;
    cfg.memory = 4;
    cfg.n_bits = 4000;
    cfg.replications = 3;
    cfg.seed = 77;
    return cfg;
}
}  // namespace

TEST_CASE("generate_bits") {
    Rng rng(1, 0);
    auto zeros = generate_bits(100, 0.0, rng);
    CHECK(std::count(zeros.begin(), zeros.end(), 1) == 0);
    auto ones = generate_bits(100, 1.0, rng);
    CHECK(std::count(ones.begin(), ones.end(), 1) == 100);

    const std::uint32_t n = 50000;
    auto fair = generate_bits(n, 0.5, rng);
    const double mean =
        static_cast<double>(std::count(fair.begin(), fair.end(), 1)) / n;
    CHECK(std::abs(mean - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("channel slot statistics (binomial-taps mode)") {
    const auto model = selected_model();
    const auto cfg = small_config();
    const Taps tp = taps(model, cfg.t_s, cfg.memory);

    SUBCASE("all-zero bits and zero noise give zero output") {
        LinkConfig quiet = cfg;
        quiet.pi1 = 0.0;
        quiet.sigma_n_sq = 0.0;
        const auto trace = simulate_trace(tp, quiet, 0);
        for (const auto& slot : trace) {
            CHECK(slot.y[0] == 0.0);
            CHECK(slot.y[1] == 0.0);
        }
    }
    SUBCASE("steady-state mean for bit-1 is Q1 A_0 + mu_I") {
        const auto stats = interference_stats(cfg.q1, tp, cfg.pi1, cfg.memory + 1);
        LinkConfig big = cfg;
        big.n_bits = 250000;
        big.replications = 1;
        const auto trace = simulate_trace(tp, big, 0);
        double sum = 0;
        std::uint64_t count = 0;
        for (const auto& slot : trace) {
            if (slot.slot < static_cast<std::uint32_t>(cfg.memory)) continue;
            for (int rx = 0; rx < 2; ++rx)
                if (slot.bits[rx]) {
                    sum += slot.y[rx];
                    ++count;
                }
        }
        const double expected = cfg.q1 * tp.own[0] + stats.mean;
        const double var_guess = cfg.q1 * tp.own[0] * (1 - tp.own[0]) +
                                 stats.variance + cfg.sigma_n_sq;
        const double se = std::sqrt(var_guess / static_cast<double>(count));
        CHECK(std::abs(sum / static_cast<double>(count) - expected) < 3 * se);
    }
    SUBCASE("determinism per (seed, replication)") {
        const auto a = simulate_trace(tp, cfg, 1);
        const auto b = simulate_trace(tp, cfg, 1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].y[0] == b[i].y[0]);
        const auto c = simulate_trace(tp, cfg, 2);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.size() && !any_diff; ++i)
            any_diff = a[i].y[0] != c[i].y[0];
        CHECK(any_diff);
    }
}

TEST_CASE("multinomial mode agrees with binomial mode in the mean") {
    const auto model = selected_model();
    auto cfg = small_config();
    cfg.n_bits = 150000;
    cfg.replications = 1;
    const Taps tp = taps(model, cfg.t_s, cfg.memory);

    auto mean_y1 = [&](ChannelMode mode) {
        LinkConfig c = cfg;
        c.channel_mode = mode;
        const auto trace = simulate_trace(tp, c, 0);
        double sum = 0;
        std::uint64_t count = 0;
        for (const auto& slot : trace) {
            if (slot.slot < static_cast<std::uint32_t>(cfg.memory)) continue;
            if (slot.bits[0]) {
                sum += slot.y[0];
                ++count;
            }
        }
        return std::pair{sum / static_cast<double>(count), count};
    };
    const auto [m_bin, n_bin] = mean_y1(ChannelMode::binomial_taps);
    const auto [m_mul, n_mul] = mean_y1(ChannelMode::multinomial);
    const auto stats = interference_stats(cfg.q1, tp, cfg.pi1, cfg.memory + 1);
    const double var_guess = cfg.q1 * tp.own[0] * (1 - tp.own[0]) + stats.variance +
                             cfg.sigma_n_sq;
    const double se =
        std::sqrt(var_guess / static_cast<double>(n_bin) + var_guess / static_cast<double>(n_mul));
    CHECK(std::abs(m_bin - m_mul) < 3 * se);
}

TEST_CASE("detectors") {
    const auto model = selected_model();
    const auto cfg = small_config();
    const Taps tp = taps(model, cfg.t_s, cfg.memory);
    const double a0 = tp.own[0];

    SUBCASE("fixed boundary convention is strict") {
        SlotState slot;
        slot.y[0] = 0.2 * cfg.q1_ref;  // exactly on the threshold
        slot.y[1] = 0.0;
        slot.genie_gain[0] = slot.genie_gain[1] = 100;
        const auto outputs = detector_outputs(slot, cfg, a0);
        DetectorSpec fixed{DetectorKind::fixed, {}, 0.2, false};
        int decision[2];
        detect(fixed, outputs, decision);
        CHECK(decision[0] == 0);
        CHECK(decision[1] == 0);
    }
    SUBCASE("practical output is adaptive output over A_0") {
        const auto trace = simulate_trace(tp, cfg, 0);
        for (std::size_t i = 0; i < 100; ++i) {
            const auto outputs = detector_outputs(trace[i], cfg, a0);
            for (int rx = 0; rx < 2; ++rx) {
                CHECK(outputs.adaptive[rx] ==
                      doctest::Approx(a0 * outputs.practical[rx]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("genie output is exactly 1 for clean bit-1") {
        SlotState slot;
        slot.bits[0] = 1;
        slot.genie_gain[0] = 123;
        slot.y[0] = 123;
        const auto outputs = detector_outputs(slot, cfg, a0);
        CHECK(outputs.genie[0] == 1.0);
    }
    SUBCASE("genie gain of zero falls back to practical normalization") {
        SlotState slot;
        slot.genie_gain[0] = 0;
        slot.genie_gain[1] = 5;
        slot.y[0] = 50;
        const auto outputs = detector_outputs(slot, cfg, a0);
        CHECK(outputs.genie[0] == outputs.practical[0]);
        CHECK(outputs.genie_fallbacks == 1);
    }
}

TEST_CASE("adaptive and practical decisions are identical under scaled thresholds") {
    const auto model = selected_model();
    const auto cfg = small_config();
    const Taps tp = taps(model, cfg.t_s, cfg.memory);
    const auto analytic = analytic_thresholds(tp, cfg);

    // eta_a = A_0 * eta_p by construction.
    CHECK(analytic.adaptive.upper ==
          doctest::Approx(tp.own[0] * analytic.practical.upper).epsilon(1e-15));

    DetectorSpec adaptive{DetectorKind::adaptive, analytic.adaptive, 0, false};
    DetectorSpec practical{DetectorKind::practical_zf, analytic.practical, 0, false};
    const auto trace = simulate_trace(tp, cfg, 0);
    for (const auto& slot : trace) {
        const auto outputs = detector_outputs(slot, cfg, tp.own[0]);
        int da[2], dp[2];
        detect(adaptive, outputs, da);
        detect(practical, outputs, dp);
        CHECK(da[0] == dp[0]);
        CHECK(da[1] == dp[1]);
        for (int rx = 0; rx < 2; ++rx) {
            const double rel = std::abs(outputs.adaptive[rx] -
                                        tp.own[0] * outputs.practical[rx]);
            CHECK(rel <= 1e-12 * std::max(1.0, std::abs(outputs.adaptive[rx])));
        }
    }
}

TEST_CASE("run_ber") {
    const auto model = selected_model();
    const auto cfg = small_config();
    const Taps tp = taps(model, cfg.t_s, cfg.memory);
    const auto analytic = analytic_thresholds(tp, cfg);

    SUBCASE("huge Q1, no memory, no noise gives zero BER") {
        LinkConfig clean = cfg;
        clean.q1 = 1e6;
        clean.sigma_n_sq = 0;
        clean.memory = 0;
        clean.n_bits = 2000;
        clean.replications = 1;
        Taps t0;
        t0.own = tp.own.head(1);
        t0.cross = Eigen::ArrayXd::Zero(1);
        // Perfectly separable outputs (0 vs 1); any interior pair works.
        DetectorSpec spec{DetectorKind::practical_zf, ThresholdPair{-0.5, 0.5}, 0, false};
        const auto result = run_ber(clean, spec, t0);
        CHECK(result.ber_mean == 0.0);
    }
    SUBCASE("deterministic results and sane statistics") {
        DetectorSpec spec{DetectorKind::practical_zf, analytic.practical, 0, false};
        const auto a = run_ber(cfg, spec, tp);
        const auto b = run_ber(cfg, spec, tp);
        CHECK(a.ber_mean == b.ber_mean);
        CHECK(a.ber_std == b.ber_std);
        CHECK(a.ber_mean > 0.0);
        CHECK(a.ber_mean < 0.5);
        CHECK(a.bits == 2ull * cfg.n_bits * cfg.replications);
    }
    SUBCASE("adaptive equals practical BER exactly") {
        DetectorSpec adaptive{DetectorKind::adaptive, analytic.adaptive, 0, false};
        DetectorSpec practical{DetectorKind::practical_zf, analytic.practical, 0, false};
        const auto results = run_ber_multi(cfg, {adaptive, practical}, tp);
        CHECK(results[0].ber_mean == results[1].ber_mean);
    }
}

TEST_CASE("sweep_thresholds") {
    const auto model = selected_model();
    auto cfg = small_config();
    cfg.n_bits = 20000;
    const Taps tp = taps(model, cfg.t_s, cfg.memory);

    SUBCASE("degenerate grid returns its single point") {
        const auto sweep = sweep_thresholds(cfg, DetectorKind::genie_zf, {0.5}, tp);
        CHECK(sweep.best_threshold == 0.5);
        CHECK(sweep.grid.size() == 1);
    }
    SUBCASE("analytic practical thresholds sit in the empirical plateau") {
        std::vector<double> grid;
        for (double eta = -1.0; eta <= 2.0; eta += 1e-3) grid.push_back(eta);
        const auto sweep = sweep_thresholds(cfg, DetectorKind::practical_zf, grid, tp);

        const auto analytic = analytic_thresholds(tp, cfg);
        DetectorSpec practical{DetectorKind::practical_zf, analytic.practical, 0, false};
        LinkConfig one_rep = cfg;
        one_rep.replications = 5;
        const auto result = run_ber(one_rep, practical, tp);
        // Within one replication std of the sweep optimum.
        CHECK(result.ber_mean <=
              sweep.best_ber + std::max(result.ber_std, 1.0 / cfg.n_bits) * 1.0 + 1e-3);
    }
    SUBCASE("empty grid rejected") {
        CHECK_THROWS(sweep_thresholds(cfg, DetectorKind::fixed, {}, tp));
    }
}
