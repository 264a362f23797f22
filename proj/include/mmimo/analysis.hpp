#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

#include "mmimo/channel_model.hpp"

namespace mmimo {

/// Mean and variance of the total ISI + ILI mass at symbol slot n,
/// truncated at the configured memory.
struct InterferenceStats {
    double mean = 0.0;
    double variance = 0.0;
    int slot_index = 1;
    int memory = 0;
};

/// Mean/variance of a single ISI term Q_{x[n-k]} * S[k]: a Bernoulli(pi1)
/// mixture of Binomial(Q1, a_k) and zero.
inline std::pair<double, double> isi_term_stats(double q1, double a_k, double pi1) {
    const double pi0 = 1.0 - pi1;
    const double mean = pi1 * q1 * a_k;
    const double variance =
        pi1 * q1 * a_k * (1.0 - a_k) + pi0 * pi1 * q1 * q1 * a_k * a_k;
    return {mean, variance};
}

/// Total interference moments at slot n (1-based): own-link taps enter for
/// k = 1..min(n-1, L), cross-link taps for k = 0..min(n-1, L).
inline InterferenceStats interference_stats(double q1, const Taps& taps, double pi1,
                                            int slot_index) {
    if (slot_index < 1) throw std::domain_error("interference_stats: slot index >= 1");
    const int memory = static_cast<int>(taps.own.size()) - 1;
    const double pi0 = 1.0 - pi1;
    const int k_max = std::min(slot_index - 1, memory);

    double sum_a = 0.0, sum_a2 = 0.0, sum_a1ma = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double a = taps.own[k];
        sum_a += a;
        sum_a2 += a * a;
        sum_a1ma += a * (1.0 - a);
    }
    double sum_b = 0.0, sum_b2 = 0.0, sum_b1mb = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const double b = taps.cross[k];
        sum_b += b;
        sum_b2 += b * b;
        sum_b1mb += b * (1.0 - b);
    }

    InterferenceStats out;
    out.mean = pi1 * q1 * (sum_a + sum_b);
    out.variance = pi0 * pi1 * q1 * q1 * (sum_a2 + sum_b2) +
                   pi1 * q1 * (sum_a1ma + sum_b1mb);
    out.slot_index = slot_index;
    out.memory = memory;
    return out;
}

/// Gaussian approximation of the normalized detector output conditioned on
/// the sent bit.
struct GaussApprox {
    double mu0 = 0.0;
    double sigma0_sq = 0.0;
    double mu1 = 1.0;
    double sigma1_sq = 0.0;
};

/// Moments of the practical-ZF output y / (Q1 A_0).
inline GaussApprox gauss_approx_practical(double q1, double a0,
                                          const InterferenceStats& interference,
                                          double sigma_n_sq) {
    if (!(q1 * a0 > 0.0))
        throw std::domain_error("gauss_approx_practical: Q1*A_0 must be positive");
    GaussApprox g;
    const double scale = q1 * a0;
    g.mu0 = interference.mean / scale;
    g.sigma0_sq = (interference.variance + sigma_n_sq) / (scale * scale);
    g.mu1 = 1.0 + g.mu0;
    g.sigma1_sq = (1.0 - a0) / scale + g.sigma0_sq;
    return g;
}

/// Moments of the adaptive output y / Q1: means scale by A_0, standard
/// deviations scale by A_0.
inline GaussApprox gauss_approx_adaptive(const GaussApprox& practical, double a0) {
    GaussApprox g;
    g.mu0 = a0 * practical.mu0;
    g.mu1 = a0 * practical.mu1;
    g.sigma0_sq = a0 * a0 * practical.sigma0_sq;
    g.sigma1_sq = a0 * a0 * practical.sigma1_sq;
    return g;
}

/// The two intersection points of the conditional densities; degenerate
/// when the variances are equal.
struct ThresholdPair {
    double lower = 0.0;
    double upper = 0.0;
    bool degenerate = false;
};

namespace detail {

/// log N(y; mu, sigma^2) up to the shared 1/sqrt(2 pi) constant.
inline double log_density(double y, double mu, double sigma_sq) {
    return -0.5 * std::log(sigma_sq) - (y - mu) * (y - mu) / (2.0 * sigma_sq);
}

/// Bisection on f over [lo, hi]; assumes a sign change.
template <typename F>
double bisect(F&& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Intersection thresholds of N(mu0, sigma0^2) and N(mu1, sigma1^2).
/// The closed form applies to the unit-separation case mu1 = mu0 + 1 of the
/// practical/adaptive output model; any other separation is solved
/// numerically on the log-density difference.
inline ThresholdPair gaussian_intersection(const GaussApprox& g) {
    if (!(g.sigma0_sq > 0.0) || !(g.sigma1_sq > 0.0))
        throw std::domain_error("gaussian_intersection: variances must be positive");
    const double sep = g.mu1 - g.mu0;
    if (!(sep > 0.0))
        throw std::domain_error("gaussian_intersection: mu1 must exceed mu0");
    const double beta = g.sigma1_sq / g.sigma0_sq;
    if (beta < 1.0 - 1e-12)
        throw std::domain_error("gaussian_intersection: sigma1 < sigma0 is inconsistent");

    ThresholdPair out;
    if (std::abs(beta - 1.0) <= 1e-12) {
        out.lower = out.upper = 0.5 * (g.mu0 + g.mu1);
        out.degenerate = true;
        return out;
    }

    if (std::abs(sep - 1.0) <= 1e-12) {
        // Closed form for the normalized unit-separation model.
        const double disc =
            1.0 + (beta - 1.0) * (1.0 + g.sigma0_sq * beta * std::log(beta));
        const double root = std::sqrt(disc);
        out.lower = g.mu0 + (-1.0 - root) / (beta - 1.0);
        out.upper = g.mu0 + (-1.0 + root) / (beta - 1.0);
        return out;
    }

    // General separation: two sign changes of logphi0 - logphi1 around the
    // wider density's advantage regions.
    auto diff = [&](double y) {
        return detail::log_density(y, g.mu0, g.sigma0_sq) -
               detail::log_density(y, g.mu1, g.sigma1_sq);
    };
    // diff is a downward parabola, positive at mu0, negative in both tails.
    const double s0 = std::sqrt(g.sigma0_sq);
    const double s1 = std::sqrt(g.sigma1_sq);
    double lo = g.mu0 - s0;
    while (diff(lo) > 0.0) lo -= s0;
    double hi = g.mu1 + s1;
    while (diff(hi) > 0.0) hi += s1;
    out.lower = detail::bisect(diff, lo, g.mu0);
    out.upper = detail::bisect(diff, g.mu0, hi);
    return out;
}

/// MAP thresholds for prior pi1; the equiprobable case is the density
/// intersection, anything else adds the log-prior ratio and is solved
/// numerically.
ThresholdPair map_thresholds(const GaussApprox& g, double pi1);

/// Decision rule: 0 inside the open interval (lower, upper), 1 otherwise.
inline int decide(double y_hat, const ThresholdPair& thresholds) {
    return (thresholds.upper > y_hat && y_hat > thresholds.lower) ? 0 : 1;
}

}  // namespace mmimo
