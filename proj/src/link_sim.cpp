#include "mmimo/link_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmimo {

std::string detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::fixed: return "fixed";
        case DetectorKind::adaptive: return "adaptive";
        case DetectorKind::practical_zf: return "practical_zf";
        case DetectorKind::genie_zf: return "genie_zf";
    }
    return "unknown";
}

std::vector<int> generate_bits(std::uint32_t n_bits, double pi1, Rng& rng) {
    std::vector<int> bits(n_bits);
    for (auto& b : bits) b = rng.bernoulli(pi1) ? 1 : 0;
    return bits;
}

namespace {

std::uint32_t emission_count(const LinkConfig& cfg, int bit) {
    const double q = bit ? cfg.q1 : cfg.q0;
    return static_cast<std::uint32_t>(q);
}

std::vector<SlotState> simulate_binomial(const Taps& taps, const LinkConfig& cfg,
                                         Rng& rng, std::uint32_t total_slots) {
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const double a0 = taps.own[0];
    const auto q1 = static_cast<std::uint32_t>(cfg.q1);
    const double sigma_n = std::sqrt(cfg.sigma_n_sq);

    std::vector<SlotState> trace(total_slots);
    std::vector<int> bits[2];
    for (int tx = 0; tx < 2; ++tx) bits[tx] = generate_bits(total_slots, cfg.pi1, rng);

    for (std::uint32_t n = 0; n < total_slots; ++n) {
        SlotState& slot = trace[n];
        slot.slot = n;
        slot.bits[0] = bits[0][n];
        slot.bits[1] = bits[1][n];
        for (int rx = 0; rx < 2; ++rx) {
            const int other = 1 - rx;
            // The current-slot channel state exists regardless of the sent
            // bit; when bit-1 is sent the same realization is the signal.
            const std::uint32_t gain = rng.binomial(q1, a0);
            slot.genie_gain[rx] = gain;
            double y = 0.0;
            if (bits[rx][n])
                y += gain;
            else if (cfg.q0 > 0.0)
                y += rng.binomial(emission_count(cfg, 0), a0);
            for (int k = 1; k <= memory && k <= static_cast<int>(n); ++k)
                y += rng.binomial(emission_count(cfg, bits[rx][n - k]), taps.own[k]);
            for (int k = 0; k <= memory && k <= static_cast<int>(n); ++k)
                y += rng.binomial(emission_count(cfg, bits[other][n - k]), taps.cross[k]);
            y += rng.normal(cfg.mu_n, sigma_n);
            slot.y[rx] = y;
        }
    }
    return trace;
}

std::vector<SlotState> simulate_multinomial(const Taps& taps, const LinkConfig& cfg,
                                            Rng& rng, std::uint32_t total_slots) {
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const double a0 = taps.own[0];
    const auto q1 = static_cast<std::uint32_t>(cfg.q1);
    const double sigma_n = std::sqrt(cfg.sigma_n_sq);
    const std::size_t n_cat = 2 * (memory + 1);

    std::vector<double> probs(n_cat);
    for (int k = 0; k <= memory; ++k) {
        probs[k] = taps.own[k];
        probs[memory + 1 + k] = taps.cross[k];
    }
    std::vector<std::uint32_t> counts(n_cat);

    std::vector<SlotState> trace(total_slots);
    std::vector<int> bits[2];
    for (int tx = 0; tx < 2; ++tx) bits[tx] = generate_bits(total_slots, cfg.pi1, rng);

    // arrivals[rx][n]: integer molecule arrivals scheduled into slot n.
    std::vector<std::vector<double>> arrivals(2, std::vector<double>(total_slots, 0.0));
    std::vector<std::vector<std::uint32_t>> own_slot0(
        2, std::vector<std::uint32_t>(total_slots, 0));

    for (std::uint32_t n = 0; n < total_slots; ++n) {
        for (int tx = 0; tx < 2; ++tx) {
            const std::uint32_t q = emission_count(cfg, bits[tx][n]);
            if (q == 0) continue;
            rng.multinomial(q, probs, counts);
            const int own_rx = tx;
            const int cross_rx = 1 - tx;
            for (int k = 0; k <= memory; ++k) {
                if (n + k >= total_slots) break;
                arrivals[own_rx][n + k] += counts[k];
                arrivals[cross_rx][n + k] += counts[memory + 1 + k];
            }
            own_slot0[own_rx][n] = counts[0];
        }
    }

    for (std::uint32_t n = 0; n < total_slots; ++n) {
        SlotState& slot = trace[n];
        slot.slot = n;
        slot.bits[0] = bits[0][n];
        slot.bits[1] = bits[1][n];
        for (int rx = 0; rx < 2; ++rx) {
            slot.genie_gain[rx] =
                bits[rx][n] ? own_slot0[rx][n] : rng.binomial(q1, a0);
            slot.y[rx] = arrivals[rx][n] + rng.normal(cfg.mu_n, sigma_n);
        }
    }
    return trace;
}

}  // namespace

std::vector<SlotState> simulate_trace(const Taps& taps, const LinkConfig& cfg,
                                      std::uint32_t replication) {
    if (cfg.n_bits < 1) throw std::domain_error("simulate_trace: n_bits >= 1");
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const std::uint32_t total_slots = cfg.n_bits + static_cast<std::uint32_t>(memory);
    Rng rng(cfg.seed, 0x7e1u + replication);
    return cfg.channel_mode == ChannelMode::binomial_taps
               ? simulate_binomial(taps, cfg, rng, total_slots)
               : simulate_multinomial(taps, cfg, rng, total_slots);
}

DetectorOutputs detector_outputs(const SlotState& slot, const LinkConfig& cfg,
                                 double a0) {
    DetectorOutputs out;
    for (int rx = 0; rx < 2; ++rx) {
        const double y = slot.y[rx];
        out.fixed[rx] = y / cfg.q1_ref;
        out.adaptive[rx] = y / cfg.q1;
        out.practical[rx] = y / (cfg.q1 * a0);
        if (slot.genie_gain[rx] > 0) {
            out.genie[rx] = y / static_cast<double>(slot.genie_gain[rx]);
        } else {
            out.genie[rx] = out.practical[rx];
            ++out.genie_fallbacks;
        }
    }
    return out;
}

void detect(const DetectorSpec& spec, const DetectorOutputs& outputs, int decision[2]) {
    for (int rx = 0; rx < 2; ++rx) {
        double y_hat = 0.0;
        switch (spec.kind) {
            case DetectorKind::fixed: y_hat = outputs.fixed[rx]; break;
            case DetectorKind::adaptive: y_hat = outputs.adaptive[rx]; break;
            case DetectorKind::practical_zf: y_hat = outputs.practical[rx]; break;
            case DetectorKind::genie_zf: y_hat = outputs.genie[rx]; break;
        }
        if (spec.kind == DetectorKind::adaptive ||
            spec.kind == DetectorKind::practical_zf || spec.two_sided) {
            decision[rx] = decide(y_hat, spec.thresholds);
        } else {
            decision[rx] = y_hat > spec.single_threshold ? 1 : 0;
        }
    }
}

AnalyticThresholds analytic_thresholds(const Taps& taps, const LinkConfig& cfg) {
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const auto stats = interference_stats(cfg.q1, taps, cfg.pi1, memory + 1);
    const auto practical =
        gauss_approx_practical(cfg.q1, taps.own[0], stats, cfg.sigma_n_sq);
    AnalyticThresholds out;
    out.practical_moments = practical;
    out.practical = map_thresholds(practical, cfg.pi1);
    out.adaptive.lower = taps.own[0] * out.practical.lower;
    out.adaptive.upper = taps.own[0] * out.practical.upper;
    out.adaptive.degenerate = out.practical.degenerate;
    return out;
}

std::vector<BerResult> run_ber_multi(const LinkConfig& cfg,
                                     const std::vector<DetectorSpec>& specs,
                                     const Taps& taps) {
    const int memory = static_cast<int>(taps.own.size()) - 1;
    std::vector<BerResult> results(specs.size());
    std::vector<std::vector<double>> rep_ber(specs.size());

    for (std::uint32_t rep = 0; rep < cfg.replications; ++rep) {
        const auto trace = simulate_trace(taps, cfg, rep);
        std::vector<std::uint64_t> errors(specs.size(), 0);
        std::uint64_t counted = 0;
        for (const auto& slot : trace) {
            if (slot.slot < static_cast<std::uint32_t>(memory)) continue;  // warm-up
            const auto outputs = detector_outputs(slot, cfg, taps.own[0]);
            counted += 2;
            for (std::size_t s = 0; s < specs.size(); ++s) {
                int decision[2];
                detect(specs[s], outputs, decision);
                errors[s] += (decision[0] != slot.bits[0]) + (decision[1] != slot.bits[1]);
                if (specs[s].kind == DetectorKind::genie_zf)
                    results[s].genie_fallbacks += outputs.genie_fallbacks;
            }
        }
        for (std::size_t s = 0; s < specs.size(); ++s) {
            rep_ber[s].push_back(static_cast<double>(errors[s]) /
                                 static_cast<double>(counted));
            results[s].bits += counted;
        }
    }

    for (std::size_t s = 0; s < specs.size(); ++s) {
        auto& r = results[s];
        r.kind = specs[s].kind;
        r.q1 = cfg.q1;
        r.t_s = cfg.t_s;
        double mean = 0.0;
        for (double b : rep_ber[s]) mean += b;
        mean /= static_cast<double>(rep_ber[s].size());
        double var = 0.0;
        for (double b : rep_ber[s]) var += (b - mean) * (b - mean);
        if (rep_ber[s].size() > 1) var /= static_cast<double>(rep_ber[s].size() - 1);
        r.ber_mean = mean;
        r.ber_std = std::sqrt(var);
    }
    return results;
}

BerResult run_ber(const LinkConfig& cfg, const DetectorSpec& spec, const Taps& taps) {
    return run_ber_multi(cfg, {spec}, taps).front();
}

ThresholdSweep sweep_thresholds(const LinkConfig& cfg, DetectorKind kind,
                                const std::vector<double>& grid, const Taps& taps) {
    if (grid.empty()) throw std::invalid_argument("sweep_thresholds: empty grid");
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const auto trace = simulate_trace(taps, cfg, 0);

    // Collect normalized outputs once; every grid point reuses them.
    std::vector<double> outputs_1, outputs_bits;
    outputs_1.reserve(2 * trace.size());
    outputs_bits.reserve(2 * trace.size());
    for (const auto& slot : trace) {
        if (slot.slot < static_cast<std::uint32_t>(memory)) continue;
        const auto outputs = detector_outputs(slot, cfg, taps.own[0]);
        for (int rx = 0; rx < 2; ++rx) {
            double y_hat = 0.0;
            switch (kind) {
                case DetectorKind::fixed: y_hat = outputs.fixed[rx]; break;
                case DetectorKind::adaptive: y_hat = outputs.adaptive[rx]; break;
                case DetectorKind::practical_zf: y_hat = outputs.practical[rx]; break;
                case DetectorKind::genie_zf: y_hat = outputs.genie[rx]; break;
            }
            outputs_1.push_back(y_hat);
            outputs_bits.push_back(slot.bits[rx]);
        }
    }

    // Split outputs by the sent bit and sort, so each grid point is two
    // binary searches: errors(eta) = #(bit-1 outputs <= eta) + #(bit-0 > eta).
    std::vector<double> out0, out1;
    for (std::size_t i = 0; i < outputs_1.size(); ++i)
        (outputs_bits[i] ? out1 : out0).push_back(outputs_1[i]);
    std::sort(out0.begin(), out0.end());
    std::sort(out1.begin(), out1.end());

    ThresholdSweep sweep;
    sweep.grid = grid;
    sweep.ber.resize(grid.size());
    const auto n = static_cast<double>(outputs_1.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double eta = grid[g];
        const auto missed_ones =
            std::upper_bound(out1.begin(), out1.end(), eta) - out1.begin();
        const auto false_ones =
            out0.end() - std::upper_bound(out0.begin(), out0.end(), eta);
        sweep.ber[g] = static_cast<double>(missed_ones + false_ones) / n;
        if (g == 0 || sweep.ber[g] < sweep.best_ber) {
            sweep.best_ber = sweep.ber[g];
            sweep.best_threshold = eta;
        }
    }
    return sweep;
}

}  // namespace mmimo
