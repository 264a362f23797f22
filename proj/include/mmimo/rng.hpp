#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mmimo {

/// splitmix64 — used only to expand seeds into full generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with Box-Muller normal variates. Each logical stream is
/// keyed by (master seed, stream id) so results do not depend on how work
/// is scheduled across threads.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
        for (auto& s : state_) s = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on (0,1); never returns 0 so log() below is safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal variate (Box-Muller, pair-cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Bernoulli(p).
    bool bernoulli(double p) { return uniform() < p; }

    /// Binomial(n, p) by inversion for small mean, otherwise by summing
    /// Bernoulli trials is too slow; use the BTPE-free approach: inversion
    /// when n*min(p,1-p) is small, normal approximation rejection otherwise.
    std::uint32_t binomial(std::uint32_t n, double p);

    /// One multinomial draw of n trials over the given probabilities
    /// (remainder mass is implicit). Fills counts[i] per category by
    /// conditional binomials.
    template <typename ProbRange, typename CountRange>
    void multinomial(std::uint32_t n, const ProbRange& probs, CountRange& counts) {
        double remaining_p = 1.0;
        std::uint32_t remaining_n = n;
        std::size_t i = 0;
        for (double p : probs) {
            if (remaining_n == 0 || remaining_p <= 0.0) {
                counts[i++] = 0;
                continue;
            }
            const double cond = std::min(1.0, std::max(0.0, p / remaining_p));
            const std::uint32_t c = binomial(remaining_n, cond);
            counts[i++] = c;
            remaining_n -= c;
            remaining_p -= p;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline std::uint32_t Rng::binomial(std::uint32_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    bool flipped = false;
    double q = p;
    if (q > 0.5) {
        q = 1.0 - q;
        flipped = true;
    }
    const double mean = n * q;
    std::uint32_t k;
    if (mean < 1000.0) {
        // Inversion by sequential search on the CDF.
        const double log1mq = std::log1p(-q);
        double u = uniform();
        double pdf = std::exp(n * log1mq);
        double cdf = pdf;
        k = 0;
        const double ratio = q / (1.0 - q);
        while (u > cdf && k < n) {
            ++k;
            pdf *= ratio * (static_cast<double>(n - k + 1) / static_cast<double>(k));
            cdf += pdf;
        }
    } else {
        // Normal approximation with continuity correction, resampled on
        // out-of-range. Only reached for very large means.
        const double sd = std::sqrt(mean * (1.0 - q));
        double x;
        do {
            x = std::floor(normal(mean + 0.5, sd));
        } while (x < 0.0 || x > static_cast<double>(n));
        k = static_cast<std::uint32_t>(x);
    }
    return flipped ? n - k : k;
}

}  // namespace mmimo
