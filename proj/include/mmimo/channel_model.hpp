#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmimo/topology.hpp"

namespace mmimo {

/// Closed-form fraction of molecules absorbed by a single spherical
/// receiver at surface distance d by time t.
inline double f_siso(double t, double r_r, double d, double D) {
    if (t < 0.0) throw std::domain_error("f_siso: negative time");
    if (t == 0.0) return 0.0;
    return (r_r / (r_r + d)) * std::erfc(d / std::sqrt(4.0 * D * t));
}

/// Three-parameter hitting-probability model. (1, 0.5, 0.5) reduces to
/// the SISO closed form.
struct ModelParams {
    double b1 = 1.0;
    double b2 = 0.5;
    double b3 = 0.5;
};

inline double f_model(double t, const ModelParams& p, double r_r, double d, double D) {
    if (t < 0.0) throw std::domain_error("f_model: negative time");
    if (t == 0.0) return 0.0;
    return (p.b1 * r_r / (d + r_r)) *
           std::erfc(d / (std::pow(4.0 * D, p.b2) * std::pow(t, p.b3)));
}

/// Analytic t -> infinity limit of f_model.
inline double f_model_limit(const ModelParams& p, double r_r, double d) {
    return p.b1 * r_r / (d + r_r);
}

struct FitDiagnostics {
    double rmse = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FitResult {
    ModelParams params;
    FitDiagnostics diagnostics;
};

/// Least-squares fit of (b1, b2, b3) to CDF samples on a time grid.
/// Levenberg-Marquardt with numeric Jacobian, box constraints
/// b1 in (0, 1.5], b2, b3 in (0, 1). Deterministic.
FitResult fit_model(const Eigen::ArrayXd& times, const Eigen::ArrayXd& values,
                    double r_r, double d, double D,
                    ModelParams initial_guess = {1.0, 0.5, 0.5});

/// Per-link fitted channel: one parameter set for the own links
/// (F11 = F22) and one for the cross links (F12 = F21).
struct ChannelModel {
    Topology topology;
    ModelParams own;
    ModelParams cross;

    double f_own(double t) const {
        return f_model(t, own, topology.radius(), topology.surface_distance(),
                       topology.diffusion());
    }
    double f_cross(double t) const {
        return f_model(t, cross, topology.radius(), topology.surface_distance(),
                       topology.diffusion());
    }
    double f_own_limit() const {
        return f_model_limit(own, topology.radius(), topology.surface_distance());
    }
    double f_cross_limit() const {
        return f_model_limit(cross, topology.radius(), topology.surface_distance());
    }
};

/// Slot taps: A_k (own link) and B_k (cross link) for k = 0..L, where
/// tap k is the hitting mass in (k t_s, (k+1) t_s].
struct Taps {
    Eigen::ArrayXd own;    // A_0 .. A_L
    Eigen::ArrayXd cross;  // B_0 .. B_L
};

inline Taps taps(const ChannelModel& model, double t_s, int memory) {
    if (!(t_s > 0.0)) throw std::domain_error("taps: t_s must be positive");
    if (memory < 0) throw std::domain_error("taps: memory must be >= 0");
    Taps out;
    out.own.resize(memory + 1);
    out.cross.resize(memory + 1);
    for (int k = 0; k <= memory; ++k) {
        out.own[k] = model.f_own((k + 1) * t_s) - model.f_own(k * t_s);
        out.cross[k] = model.f_cross((k + 1) * t_s) - model.f_cross(k * t_s);
    }
    return out;
}

/// One-shot signal-to-interference ratio at symbol duration t_s:
/// intended current-slot mass over own-link tail plus total cross mass.
inline double sir(const ChannelModel& model, double t_s) {
    if (!(t_s > 0.0)) throw std::domain_error("sir: t_s must be positive");
    const double signal = model.f_own(t_s);
    const double interference =
        (model.f_own_limit() - model.f_own(t_s)) + model.f_cross_limit();
    if (interference <= 0.0) return std::numeric_limits<double>::infinity();
    return signal / interference;
}

}  // namespace mmimo
