#include "mmimo/analysis.hpp"

namespace mmimo {

ThresholdPair map_thresholds(const GaussApprox& g, double pi1) {
    if (!(pi1 > 0.0) || !(pi1 < 1.0))
        throw std::domain_error("map_thresholds: pi1 must be in (0,1)");
    if (std::abs(pi1 - 0.5) <= 1e-12) return gaussian_intersection(g);

    const double beta = g.sigma1_sq / g.sigma0_sq;
    const double log_prior = std::log((1.0 - pi1) / pi1);
    auto diff = [&](double y) {
        return detail::log_density(y, g.mu0, g.sigma0_sq) -
               detail::log_density(y, g.mu1, g.sigma1_sq) + log_prior;
    };

    ThresholdPair out;
    if (std::abs(beta - 1.0) <= 1e-12) {
        // Equal variances: single linear boundary shifted by the prior.
        out.lower = out.upper = 0.5 * (g.mu0 + g.mu1) +
                                g.sigma0_sq * log_prior / (g.mu1 - g.mu0);
        out.degenerate = true;
        return out;
    }

    // Downward parabola in y; check whether the prior shift removes the roots.
    const double peak =
        (g.mu1 * g.sigma0_sq - g.mu0 * g.sigma1_sq) / (g.sigma0_sq - g.sigma1_sq);
    if (diff(peak) <= 0.0) {
        out.lower = out.upper = peak;
        out.degenerate = true;  // bit-0 region empty: always decide 1
        return out;
    }
    const double s0 = std::sqrt(g.sigma0_sq);
    const double s1 = std::sqrt(g.sigma1_sq);
    double lo = peak - s0;
    while (diff(lo) > 0.0) lo -= s0;
    double hi = peak + s1;
    while (diff(hi) > 0.0) hi += s1;
    out.lower = detail::bisect(diff, lo, peak);
    out.upper = detail::bisect(diff, peak, hi);
    return out;
}

}  // namespace mmimo
