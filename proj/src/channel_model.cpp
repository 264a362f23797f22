#include "mmimo/channel_model.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace mmimo {
namespace {

constexpr double kB1Lo = 1e-6, kB1Hi = 1.5;
constexpr double kBLo = 1e-6, kBHi = 1.0 - 1e-6;

Eigen::Vector3d clamp_params(Eigen::Vector3d p) {
    p[0] = std::clamp(p[0], kB1Lo, kB1Hi);
    p[1] = std::clamp(p[1], kBLo, kBHi);
    p[2] = std::clamp(p[2], kBLo, kBHi);
    return p;
}

Eigen::ArrayXd residuals(const Eigen::Vector3d& p, const Eigen::ArrayXd& t,
                         const Eigen::ArrayXd& y, double r_r, double d, double D) {
    ModelParams mp{p[0], p[1], p[2]};
    Eigen::ArrayXd r(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i)
        r[i] = f_model(t[i], mp, r_r, d, D) - y[i];
    return r;
}

}  // namespace

FitResult fit_model(const Eigen::ArrayXd& times, const Eigen::ArrayXd& values,
                    double r_r, double d, double D, ModelParams initial_guess) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_model: grid/value size mismatch");
    if (times.size() < 30)
        throw std::invalid_argument("fit_model: need at least 30 CDF points");
    if (values.abs().maxCoeff() == 0.0)
        throw std::invalid_argument("fit_model: degenerate all-zero CDF");

    Eigen::Vector3d p = clamp_params(
        Eigen::Vector3d(initial_guess.b1, initial_guess.b2, initial_guess.b3));
    Eigen::ArrayXd r = residuals(p, times, values, r_r, d, D);
    double cost = r.square().sum();

    double lambda = 1e-3;
    const int max_iter = 200;
    int iter = 0;
    bool converged = false;

    for (; iter < max_iter; ++iter) {
        // Numeric Jacobian, central differences.
        Eigen::MatrixXd jac(times.size(), 3);
        for (int j = 0; j < 3; ++j) {
            const double step = 1e-6 * std::max(1.0, std::abs(p[j]));
            Eigen::Vector3d pp = p, pm = p;
            pp[j] += step;
            pm[j] -= step;
            jac.col(j) =
                ((residuals(clamp_params(pp), times, values, r_r, d, D) -
                  residuals(clamp_params(pm), times, values, r_r, d, D)) /
                 (2.0 * step))
                    .matrix();
        }

        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d jtr = jac.transpose() * r.matrix();
        bool stepped = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            const Eigen::Vector3d delta = damped.ldlt().solve(-jtr);
            const Eigen::Vector3d cand = clamp_params(p + delta);
            const Eigen::ArrayXd cand_r = residuals(cand, times, values, r_r, d, D);
            const double cand_cost = cand_r.square().sum();
            if (cand_cost < cost) {
                const double improvement = cost - cand_cost;
                p = cand;
                r = cand_r;
                cost = cand_cost;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (improvement < 1e-15 * (1.0 + cost) && delta.norm() < 1e-10)
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) converged = true;  // no damped step improves: at a minimum
        if (converged) break;
    }

    FitResult out;
    out.params = ModelParams{p[0], p[1], p[2]};
    out.diagnostics.rmse = std::sqrt(cost / static_cast<double>(times.size()));
    out.diagnostics.iterations = iter + 1;
    out.diagnostics.converged = converged;
    return out;
}

}  // namespace mmimo
