#pragma once

#include <numbers>

namespace lutclock {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018.
namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;    // C
inline constexpr double planck = 6.62607015e-34;                // J s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double bohr_radius = 5.29177210903e-11;        // m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double bohr_magneton_hz_per_t = 1.39962449361e10;

// 176Lu+ ion mass; external input, not measured here.
inline constexpr double lu176_mass_u = 175.9426897;
} // namespace constants

// Everything inside the library is angular (rad/s). Conversions happen at the
// config/CSV/CLI boundary only.
constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double angular_to_hz(double w) { return w / kTwoPi; }

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

} // namespace lutclock
