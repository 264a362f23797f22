#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace mmimo {

/// Link subscripts (rx, tx), each in {1, 2}. Own links are (1,1) and
/// (2,2); cross links are (1,2) and (2,1).
struct LinkId {
    int rx = 1;
    int tx = 1;

    bool is_own() const { return rx == tx; }
    bool operator==(const LinkId&) const = default;
};

/// How the d and h inputs are referenced against the spherical bulges.
/// Surface mode: d is point-to-surface, h is the surface-to-surface gap
/// (center separation = 2 r_r + h). Center mode: both are center-referenced.
enum class DistanceMode { surface, center };

/// Geometry of the 2x2 setup: two point transmitters facing two absorbing
/// spherical bulges of radius r_r, diffusion coefficient D. The canonical
/// frame puts the bulge centers on the z-axis, symmetric about the origin,
/// and the transmitters at positive x so that the point-to-surface distance
/// equals d.
class Topology {
public:
    Topology(double d, double h, double r_r, double D,
             DistanceMode mode = DistanceMode::surface)
        : d_(d), h_(h), r_r_(r_r), diffusion_(D), mode_(mode) {
        if (!(d > 0.0) || !(r_r > 0.0) || !(D > 0.0) ||
            !std::isfinite(d) || !std::isfinite(h) || !std::isfinite(r_r) || !std::isfinite(D))
            throw std::domain_error("topology: d, r_r, D must be finite and positive");
        const double center_sep =
            (mode == DistanceMode::surface) ? 2.0 * r_r + h : h;
        if (center_sep < 2.0 * r_r)
            throw std::invalid_argument("topology: receiver bulges overlap");
        const double tx_x = (mode == DistanceMode::surface) ? d + r_r : d;
        if (tx_x <= r_r)
            throw std::invalid_argument("topology: transmitter inside its bulge");

        const double half = center_sep / 2.0;
        rx_center_[0] = Eigen::Vector3d(0.0, 0.0, half);
        rx_center_[1] = Eigen::Vector3d(0.0, 0.0, -half);
        tx_pos_[0] = Eigen::Vector3d(tx_x, 0.0, half);
        tx_pos_[1] = Eigen::Vector3d(tx_x, 0.0, -half);
    }

    double d() const { return d_; }
    double h() const { return h_; }
    double radius() const { return r_r_; }
    double diffusion() const { return diffusion_; }
    DistanceMode mode() const { return mode_; }

    /// Point-to-surface distance from each transmitter to its own bulge.
    double surface_distance() const {
        return (tx_pos_[0] - rx_center_[0]).norm() - r_r_;
    }

    const Eigen::Vector3d& tx_position(int tx) const { return tx_pos_[check(tx)]; }
    const Eigen::Vector3d& rx_center(int rx) const { return rx_center_[check(rx)]; }

private:
    static int check(int idx) {
        if (idx != 1 && idx != 2) throw std::out_of_range("antenna index must be 1 or 2");
        return idx - 1;
    }

    double d_, h_, r_r_, diffusion_;
    DistanceMode mode_;
    Eigen::Vector3d tx_pos_[2];
    Eigen::Vector3d rx_center_[2];
};

inline Topology make_topology(double d, double h, double r_r, double D,
                              DistanceMode mode = DistanceMode::surface) {
    return Topology(d, h, r_r, D, mode);
}

}  // namespace mmimo
