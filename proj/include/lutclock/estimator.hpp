#pragma once

// Quadrupole moment from the outer/middle frequency difference of a
// three-ion crystal:
//
//   h Df = (14/25) (3 cos^2 theta - 1) Theta m w_z^2 / e
//
// with Theta in e a0^2. The field angle is only known to lie in |theta| <= bound,
// so the estimate is the midpoint of Theta over that interval and the
// half-range is added linearly to the statistical uncertainty.

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace lutclock {

inline constexpr double kQuadrupoleDifferenceCoefficient = 14.0 / 25.0;

/// Magic angle, where 3cos^2 theta = 1.
inline double magic_angle() { return std::acos(1.0 / std::sqrt(3.0)); }

/// Forward model: outer-middle difference (Hz) for Theta (e a0^2).
inline double quadrupole_difference_hz(double theta_q, double theta, double ion_mass,
                                       double omega_z) {
    using namespace constants;
    const double c = std::cos(theta);
    return kQuadrupoleDifferenceCoefficient * (3.0 * c * c - 1.0) * theta_q * bohr_radius * bohr_radius * ion_mass *
           omega_z * omega_z / planck;
}

/// Inverse at a known angle.
inline double theta_from_difference(double delta_f_quad, double theta, double ion_mass,
                                    double omega_z) {
    return delta_f_quad / quadrupole_difference_hz(1.0, theta, ion_mass, omega_z);
}

struct ThetaEstimateInputs {
    double delta_f = 0.5922;        // measured difference, Hz
    double delta_f_sigma = 0.0045;
    double micromotion = -0.0047;   // signed contribution to delta_f, Hz
    double micromotion_sigma = 0.0002;
    double omega_z = hz_to_angular(131.66e3); // rad/s
    double omega_z_sigma = hz_to_angular(10.0);
    double theta_bound = deg_to_rad(5.0);     // rad
    double ion_mass = constants::lu176_mass_u * constants::atomic_mass_unit; // kg

    void validate() const {
        if (!(delta_f_sigma >= 0.0) || !(micromotion_sigma >= 0.0) || !(omega_z_sigma >= 0.0)) {
            throw DomainError("uncertainties must be non-negative");
        }
        if (!(omega_z > 0.0) || !(ion_mass > 0.0)) {
            throw DomainError("omega_z and ion mass must be positive");
        }
        if (!(theta_bound >= 0.0)) throw DomainError("theta bound must be non-negative");
        if (theta_bound >= magic_angle()) {
            throw DomainError("theta interval reaches the magic angle; inversion is ill-conditioned");
        }
    }
};

struct UncertaintyEntry {
    std::string name;
    double value = 0.0; // e a0^2
};

struct ThetaEstimate {
    double theta_q = 0.0; // e a0^2
    double sigma = 0.0;
    double statistical = 0.0;     // quadrature of delta_f, micromotion, omega_z terms
    double angle_half_range = 0.0;
    double theta_at_zero = 0.0;
    double theta_at_bound = 0.0;
    std::vector<UncertaintyEntry> breakdown;
};

struct ThetaPartials {
    double delta_f = 0.0;
    double micromotion = 0.0;
    double omega_z = 0.0;
    double ion_mass = 0.0;
    double theta_bound = 0.0;
};

/// Central value: midpoint of Theta over |theta| <= bound.
inline double theta_center(const ThetaEstimateInputs& in) {
    const double dq = in.delta_f - in.micromotion;
    return 0.5 * (theta_from_difference(dq, 0.0, in.ion_mass, in.omega_z) +
                  theta_from_difference(dq, in.theta_bound, in.ion_mass, in.omega_z));
}

inline ThetaPartials sensitivity_report(const ThetaEstimateInputs& in) {
    in.validate();
    const double th = theta_center(in);
    const double dq = in.delta_f - in.micromotion;
    ThetaPartials p;
    p.delta_f = th / dq;
    p.micromotion = -th / dq;
    p.omega_z = -2.0 * th / in.omega_z;
    p.ion_mass = -th / in.ion_mass;
    // Theta(b) = Theta(0) * 2 / (3cos^2 b - 1); the centre carries half of it.
    const double c = std::cos(in.theta_bound);
    const double s = std::sin(in.theta_bound);
    const double f = 3.0 * c * c - 1.0;
    p.theta_bound =
        theta_from_difference(dq, 0.0, in.ion_mass, in.omega_z) * 6.0 * c * s / (f * f);
    return p;
}

inline ThetaEstimate estimate_theta(const ThetaEstimateInputs& in) {
    in.validate();
    const double dq = in.delta_f - in.micromotion;
    ThetaEstimate e;
    e.theta_at_zero = theta_from_difference(dq, 0.0, in.ion_mass, in.omega_z);
    e.theta_at_bound = theta_from_difference(dq, in.theta_bound, in.ion_mass, in.omega_z);
    e.theta_q = 0.5 * (e.theta_at_zero + e.theta_at_bound);

    const ThetaPartials p = sensitivity_report(in);
    const double s_df = std::abs(p.delta_f) * in.delta_f_sigma;
    const double s_mm = std::abs(p.micromotion) * in.micromotion_sigma;
    const double s_wz = std::abs(p.omega_z) * in.omega_z_sigma;
    e.statistical = std::sqrt(s_df * s_df + s_mm * s_mm + s_wz * s_wz);
    e.angle_half_range = 0.5 * std::abs(e.theta_at_bound - e.theta_at_zero);
    e.sigma = e.statistical + e.angle_half_range;

    const double uniform = e.angle_half_range / std::sqrt(3.0);
    e.breakdown = {
        {"delta_f", s_df},
        {"micromotion", s_mm},
        {"omega_z", s_wz},
        {"theta_half_range", e.angle_half_range},
        {"theta_uniform", uniform},
        {"combined_linear_half_range", e.sigma},
        {"combined_quadrature_uniform", std::sqrt(e.statistical * e.statistical + uniform * uniform)},
        {"combined_quadrature_half_range",
         std::sqrt(e.statistical * e.statistical + e.angle_half_range * e.angle_half_range)},
    };
    return e;
}

} // namespace lutclock
