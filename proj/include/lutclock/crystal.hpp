#pragma once

// Linear Coulomb crystal along the trap axis and the per-ion frequency
// offsets it produces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "units.hpp"

namespace lutclock {

struct TrapConfig {
    int n_ions = 3;
    double omega_z = hz_to_angular(131.66e3); // rad/s
    double ion_mass = constants::lu176_mass_u * constants::atomic_mass_unit; // kg
    double theta = 0.0;       // field angle to the trap axis, rad
    double b_field = 100e-6;  // T
    double b_gradient = 0.0;  // T/m
    std::vector<double> micromotion_offset; // Hz per ion; empty means zeros

    /// Per-ion quadrupole coefficient: shift = K (3cos^2 theta - 1) Theta G_i / h.
    /// 2/5 reproduces hDf = (14/25)(3cos^2 theta - 1) Theta m w_z^2 / e for the
    /// outer-middle difference of three ions.
    double quadrupole_coupling = 0.4;

    void validate() const {
        if (n_ions < 1 || n_ions > 32) throw DomainError("n_ions must be in [1, 32]");
        if (!(omega_z > 0.0) || !std::isfinite(omega_z)) {
            throw DomainError("axial frequency must be positive");
        }
        if (!(ion_mass > 0.0) || !std::isfinite(ion_mass)) {
            throw DomainError("ion mass must be positive");
        }
        if (!micromotion_offset.empty() &&
            micromotion_offset.size() != static_cast<std::size_t>(n_ions)) {
            throw DomainError("micromotion_offset needs one entry per ion");
        }
    }
};

struct IonCrystal {
    std::vector<double> positions; // m, ascending
    double length_scale = 0.0;      // m

    std::size_t size() const { return positions.size(); }
};

/// l = (e^2 / (4 pi eps0 m w_z^2))^(1/3).
inline double crystal_length_scale(double ion_mass, double omega_z) {
    using namespace constants;
    const double k = elementary_charge * elementary_charge /
                     (4.0 * kPi * vacuum_permittivity * ion_mass * omega_z * omega_z);
    return std::cbrt(k);
}

namespace detail {

/// Gradient of sum u^2/2 + sum_{i<j} 1/|u_i - u_j|.
inline Eigen::VectorXd crystal_gradient(const Eigen::VectorXd& u) {
    const Eigen::Index n = u.size();
    Eigen::VectorXd g = u;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = u(i) - u(j);
            g(i) -= std::copysign(1.0 / (d * d), d);
        }
    }
    return g;
}

inline Eigen::MatrixXd crystal_hessian(const Eigen::VectorXd& u) {
    const Eigen::Index n = u.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double c = 2.0 / std::pow(std::abs(u(i) - u(j)), 3);
            h(i, i) += c;
            h(i, j) -= c;
        }
    }
    return h;
}

} // namespace detail

/// Dimensionless equilibrium positions (units of the length scale).
inline std::vector<double> dimensionless_equilibrium(int n, int max_iter = 100) {
    if (n < 1 || n > 32) throw DomainError("n_ions must be in [1, 32]");
    Eigen::VectorXd u(n);
    const double spacing = 2.0 * std::pow(static_cast<double>(n), -0.56);
    for (int i = 0; i < n; ++i) u(i) = (i - 0.5 * (n - 1)) * spacing;

    double gnorm = detail::crystal_gradient(u).norm();
    int it = 0;
    for (; it < max_iter && gnorm >= 1e-13; ++it) {
        const Eigen::VectorXd g = detail::crystal_gradient(u);
        const Eigen::VectorXd step = detail::crystal_hessian(u).ldlt().solve(g);
        // Backtrack so ions never cross and the gradient keeps shrinking.
        double a = 1.0;
        for (int k = 0; k < 60; ++k, a *= 0.5) {
            const Eigen::VectorXd trial = u - a * step;
            bool ordered = true;
            for (int i = 1; i < n; ++i) ordered = ordered && trial(i) > trial(i - 1);
            if (!ordered) continue;
            const double tn = detail::crystal_gradient(trial).norm();
            if (tn < gnorm || k == 59) {
                u = trial;
                gnorm = tn;
                break;
            }
        }
    }
    if (!(gnorm < 1e-12)) {
        throw ConvergenceError("crystal equilibrium did not converge in " +
                               std::to_string(max_iter) + " iterations");
    }
    // Remove the last rounding-level asymmetry.
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = 0.5 * (u(i) - u(n - 1 - i));
    return out;
}

inline IonCrystal equilibrium_positions(const TrapConfig& cfg) {
    cfg.validate();
    IonCrystal c;
    c.length_scale = crystal_length_scale(cfg.ion_mass, cfg.omega_z);
    for (double u : dimensionless_equilibrium(cfg.n_ions)) c.positions.push_back(u * c.length_scale);
    return c;
}

/// Axial field gradient at each ion from its neighbours, V/m^2.
inline std::vector<double> neighbour_field_gradients(const IonCrystal& crystal) {
    using namespace constants;
    const std::size_t n = crystal.size();
    std::vector<double> g(n, 0.0);
    const double k = 2.0 * elementary_charge / (4.0 * kPi * vacuum_permittivity);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = std::abs(crystal.positions[i] - crystal.positions[j]);
            if (!(d > 0.0)) throw DomainError("coincident ion positions");
            g[i] += k / (d * d * d);
        }
    }
    return g;
}

inline double tensor_angle_factor(double theta) {
    const double c = std::cos(theta);
    return 3.0 * c * c - 1.0;
}

/// Per-ion quadrupole shift (Hz) for a moment theta_q in e a0^2.
inline std::vector<double> quadrupole_shifts(const IonCrystal& crystal, const TrapConfig& cfg,
                                             double theta_q) {
    using namespace constants;
    const double moment = theta_q * elementary_charge * bohr_radius * bohr_radius; // C m^2
    const double pre = cfg.quadrupole_coupling * tensor_angle_factor(cfg.theta) * moment / planck;
    std::vector<double> out;
    for (double g : neighbour_field_gradients(crystal)) out.push_back(pre * g);
    return out;
}

/// Per-ion Zeeman shift (Hz) of the optical transition from an axial field
/// gradient; `sensitivity` is the ground-state Zeeman coefficient in Hz/T.
inline std::vector<double> zeeman_gradient_shifts(const IonCrystal& crystal, const TrapConfig& cfg,
                                                  double sensitivity) {
    std::vector<double> out;
    for (double z : crystal.positions) out.push_back(sensitivity * cfg.b_gradient * z);
    return out;
}

struct PairDifference {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0; // Hz, total_i - total_j
};

struct PerIonShifts {
    std::vector<double> quadrupole;      // Hz
    std::vector<double> zeeman_gradient; // Hz
    std::vector<double> micromotion;     // Hz
    std::vector<double> total;           // Hz
    std::vector<PairDifference> differences;

    /// Part of each ion's shift that is tensor-like (cancelled by hyperfine
    /// averaging): quadrupole and micromotion.
    double tensor(std::size_t ion) const { return quadrupole[ion] + micromotion[ion]; }

    double difference(std::size_t i, std::size_t j) const { return total[i] - total[j]; }
};

inline PerIonShifts total_shifts(const IonCrystal& crystal, const TrapConfig& cfg, double theta_q,
                                 double sensitivity) {
    cfg.validate();
    PerIonShifts s;
    const std::size_t n = crystal.size();
    s.quadrupole = quadrupole_shifts(crystal, cfg, theta_q);
    s.zeeman_gradient = zeeman_gradient_shifts(crystal, cfg, sensitivity);
    s.micromotion = cfg.micromotion_offset.empty() ? std::vector<double>(n, 0.0)
                                                   : cfg.micromotion_offset;
    if (s.micromotion.size() != n) throw DomainError("micromotion_offset needs one entry per ion");
    s.total.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.total[i] = s.quadrupole[i] + s.zeeman_gradient[i] + s.micromotion[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) s.differences.push_back({i, j, s.total[i] - s.total[j]});
    }
    return s;
}

} // namespace lutclock
