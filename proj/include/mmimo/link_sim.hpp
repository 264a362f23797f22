#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmimo/analysis.hpp"
#include "mmimo/channel_model.hpp"
#include "mmimo/rng.hpp"

namespace mmimo {

/// binomial_taps draws every tap arrival independently (the statistical
/// model behind the interference analysis); multinomial allocates each
/// emission once across all tap slots and conserves molecules exactly.
enum class ChannelMode { binomial_taps, multinomial };

enum class DetectorKind { fixed, adaptive, practical_zf, genie_zf };

std::string detector_name(DetectorKind kind);

struct LinkConfig {
    double q1 = 500.0;        // molecules per bit-1
    double q0 = 0.0;          // molecules per bit-0
    double t_s = 0.08;        // s
    double pi1 = 0.5;
    double sigma_n_sq = 10.0; // molecular noise variance
    double mu_n = 0.0;
    int memory = 4;           // interference slots L
    std::uint32_t n_bits = 50000;
    std::uint32_t replications = 20;
    std::uint64_t seed = 0;
    ChannelMode channel_mode = ChannelMode::binomial_taps;

    /// Normalization constant for the fixed detector, which must not use
    /// the true q1.
    double q1_ref = 350.0;
};

/// Received state of one symbol slot at both receivers.
struct SlotState {
    double y[2] = {0.0, 0.0};          // received count + noise per Rx
    std::uint32_t genie_gain[2] = {0, 0};  // realized own current-slot channel count
    int bits[2] = {0, 0};
    std::uint32_t slot = 0;
};

struct DetectorSpec {
    DetectorKind kind = DetectorKind::practical_zf;
    ThresholdPair thresholds;       // adaptive / practical (or two-sided others)
    double single_threshold = 0.2;  // fixed eta_f / genie eta_g
    bool two_sided = false;         // fixed / genie default to one upper threshold
};

struct BerResult {
    DetectorKind kind = DetectorKind::practical_zf;
    double q1 = 0.0;
    double t_s = 0.0;
    double ber_mean = 0.0;
    double ber_std = 0.0;
    std::uint64_t bits = 0;  // counted bits across both links and replications
    std::uint64_t genie_fallbacks = 0;
};

std::vector<int> generate_bits(std::uint32_t n_bits, double pi1, Rng& rng);

/// Simulates memory + n_bits slots for both links; the first `memory`
/// slots are warm-up and excluded from error counting downstream.
std::vector<SlotState> simulate_trace(const Taps& taps, const LinkConfig& config,
                                      std::uint32_t replication);

/// Normalized detector outputs for one slot. genie_fallback is incremented
/// when the realized gain is zero and practical normalization is used.
struct DetectorOutputs {
    double fixed[2];
    double adaptive[2];
    double practical[2];
    double genie[2];
    std::uint64_t genie_fallbacks = 0;
};

DetectorOutputs detector_outputs(const SlotState& slot, const LinkConfig& config,
                                 double a0);

/// Decisions for a single detector on one slot.
void detect(const DetectorSpec& spec, const DetectorOutputs& outputs, int decision[2]);

/// Analytic MAP thresholds for the practical-ZF output at steady state,
/// plus the adaptive pair scaled by A_0.
struct AnalyticThresholds {
    ThresholdPair practical;
    ThresholdPair adaptive;
    GaussApprox practical_moments;
};

AnalyticThresholds analytic_thresholds(const Taps& taps, const LinkConfig& config);

/// BER over `replications` independent seeded runs; all detectors in
/// `specs` are evaluated on the same slot states (common random numbers).
std::vector<BerResult> run_ber_multi(const LinkConfig& config,
                                     const std::vector<DetectorSpec>& specs,
                                     const Taps& taps);

BerResult run_ber(const LinkConfig& config, const DetectorSpec& spec, const Taps& taps);

struct ThresholdSweep {
    double best_threshold = 0.0;
    double best_ber = 1.0;
    std::vector<double> grid;
    std::vector<double> ber;
};

/// Single-upper-threshold BER sweep on one shared trace (decode 1 iff
/// output > threshold), the empirical procedure used to pick the fixed and
/// Genie thresholds.
ThresholdSweep sweep_thresholds(const LinkConfig& config, DetectorKind kind,
                                const std::vector<double>& grid, const Taps& taps);

}  // namespace mmimo
