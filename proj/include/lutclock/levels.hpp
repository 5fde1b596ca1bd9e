#pragma once

// Hyperfine level structure of the 3D1 m=0 manifold and the rotating-frame
// algebra built on it. All frequencies are angular (rad/s) and the optical
// ones are offsets from an arbitrary reference, so mHz-level detunings keep
// their resolution in double precision.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "errors.hpp"

namespace lutclock {

/// Upper m=0 states, labelled by F.
enum class UpperLevel { F6 = 0, F7 = 1, F8 = 2 };

inline constexpr std::array<UpperLevel, 3> kUpperLevels{UpperLevel::F6, UpperLevel::F7,
                                                        UpperLevel::F8};

constexpr std::size_t index_of(UpperLevel f) { return static_cast<std::size_t>(f); }
constexpr int f_number(UpperLevel f) { return 6 + static_cast<int>(f); }

inline UpperLevel upper_level_from_f(int f) {
    switch (f) {
    case 6: return UpperLevel::F6;
    case 7: return UpperLevel::F7;
    case 8: return UpperLevel::F8;
    default: throw DomainError("no upper m=0 level with F=" + std::to_string(f));
    }
}

/// Values indexed by upper level (F=6, 7, 8).
using PerLevel = std::array<double, 3>;

struct SignedCombinations {
    double f6 = 0.0;
    double f7 = 0.0;
    double f8 = 0.0;

    PerLevel as_array() const { return {f6, f7, f8}; }
};

/// Offsets of each upper level from the hyperfine average, expressed through
/// the two microwave splittings w1 = w7 - w8 and w2 = w6 - w7.
constexpr SignedCombinations signed_combinations(double w1, double w2) {
    return {(2.0 * w2 + w1) / 3.0, -(w2 - w1) / 3.0, -(2.0 * w1 + w2) / 3.0};
}

/// Upper-level energies relative to the ground-state zero point.
class LevelSystem {
public:
    LevelSystem(double omega_6, double omega_7, double omega_8)
        : omega_{omega_6, omega_7, omega_8} {
        for (double w : omega_) {
            if (!std::isfinite(w)) throw DomainError("level frequency must be finite");
        }
        if (!(omega_1() > 0.0) || !(omega_2() > 0.0)) {
            throw DomainError("levels must be ordered w6 > w7 > w8");
        }
    }

    /// Builds the levels from the F=7 position and the two splittings. The
    /// relation w6 - w8 = w1 + w2 then holds up to one rounding of w7.
    static LevelSystem from_splittings(double omega_7, double w1, double w2) {
        return LevelSystem(omega_7 + w2, omega_7, omega_7 - w1);
    }

    double omega(UpperLevel f) const { return omega_[index_of(f)]; }
    double omega_6() const { return omega_[0]; }
    double omega_7() const { return omega_[1]; }
    double omega_8() const { return omega_[2]; }
    double omega_1() const { return omega_[1] - omega_[2]; }
    double omega_2() const { return omega_[0] - omega_[1]; }

    /// Shifts each level by its own offset plus a common amount. A common
    /// shift of the upper manifold is equivalent to shifting the ground state
    /// by the opposite amount.
    LevelSystem shifted(const PerLevel& offsets, double common = 0.0) const {
        return LevelSystem(omega_[0] + offsets[0] + common, omega_[1] + offsets[1] + common,
                           omega_[2] + offsets[2] + common);
    }

private:
    PerLevel omega_;
};

/// Applied laser (offset from the same reference as the levels) and the two
/// microwave frequencies w'_1 (near 8<->7) and w'_2 (near 7<->6).
struct DriveFrequencies {
    double omega_laser = 0.0;
    double omega_p1 = 0.0;
    double omega_p2 = 0.0;

    void validate() const {
        if (!std::isfinite(omega_laser)) throw DomainError("laser frequency must be finite");
        if (!(omega_p1 > 0.0) || !(omega_p2 > 0.0) || !std::isfinite(omega_p1) ||
            !std::isfinite(omega_p2)) {
            throw DomainError("microwave frequencies must be positive and finite");
        }
    }
};

struct FrameParams {
    double delta = 0.0;        // laser detuning
    PerLevel Delta{};          // upper-level frame detunings
    PerLevel omega_bar{};      // level offsets from the hyperfine average
    PerLevel omega_bar_p{};    // same combinations of the applied microwaves
    double omega_0 = 0.0;      // hyperfine-averaged frequency
    UpperLevel addressed = UpperLevel::F7;

    double detuning(UpperLevel f) const { return Delta[index_of(f)]; }
};

inline double hyperfine_average(const LevelSystem& levels) {
    return (levels.omega_6() + levels.omega_7() + levels.omega_8()) / 3.0;
}

inline FrameParams frame_params(const LevelSystem& levels, const DriveFrequencies& drives,
                                UpperLevel addressed) {
    drives.validate();
    FrameParams frame;
    frame.addressed = addressed;
    frame.omega_0 = hyperfine_average(levels);
    frame.omega_bar = signed_combinations(levels.omega_1(), levels.omega_2()).as_array();
    frame.omega_bar_p = signed_combinations(drives.omega_p1, drives.omega_p2).as_array();
    for (std::size_t i = 0; i < 3; ++i) {
        frame.Delta[i] = frame.omega_bar_p[i] - frame.omega_bar[i];
    }
    frame.delta = drives.omega_laser - frame.omega_bar_p[index_of(addressed)] - frame.omega_0;
    return frame;
}

/// A frame with explicit detunings, bypassing the level algebra. Used where
/// a test or scan needs to dial Delta_F and delta directly.
inline FrameParams explicit_frame(double delta, const PerLevel& Delta,
                                  UpperLevel addressed = UpperLevel::F7) {
    FrameParams frame;
    frame.delta = delta;
    frame.Delta = Delta;
    frame.addressed = addressed;
    return frame;
}

} // namespace lutclock
