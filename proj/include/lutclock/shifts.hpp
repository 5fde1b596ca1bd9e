#pragma once

// Systematic-shift calculators: ac Zeeman shifts from the microwave pulses of
// the decoupled sequence, and quadratic Zeeman shifts.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "levels.hpp"
#include "units.hpp"

namespace lutclock {

struct OffResonantCoupling {
    double rabi = 0.0;     // rad/s
    double detuning = 0.0; // rad/s
    double sign = 1.0;     // +1 or -1
};

/// Minimum |detuning| / Omega for the perturbative formula.
inline constexpr double kMinDetuningRatio = 10.0;

/// sum sign * Omega^2 / (4 detuning), rad/s.
inline double off_resonant_shift(const std::vector<OffResonantCoupling>& couplings) {
    double shift = 0.0;
    for (const auto& c : couplings) {
        if (!(std::abs(c.detuning) > kMinDetuningRatio * std::abs(c.rabi))) {
            throw DomainError("coupling too close to resonance for a perturbative shift");
        }
        shift += c.sign * c.rabi * c.rabi / (4.0 * c.detuning);
    }
    return shift;
}

/// Pi times (s) for |7,0> <-> |F,m>, F in {6, 8}, m in {-1, 0, +1}.
struct PiTimeTable {
    std::array<double, 3> f6{7e-3, 3.5e-3, 9e-3};
    std::array<double, 3> f8{23e-3, 3.5e-3, 20e-3};

    double get(int f, int m) const {
        if (m < -1 || m > 1) throw DomainError("m must be -1, 0 or +1");
        if (f == 6) return f6[m + 1];
        if (f == 8) return f8[m + 1];
        throw DomainError("pi-time table holds F=6 and F=8 only");
    }

    void validate() const {
        for (double t : f6) {
            if (!(t > 0.0)) throw DomainError("pi times must be positive");
        }
        for (double t : f8) {
            if (!(t > 0.0)) throw DomainError("pi times must be positive");
        }
    }
};

/// Shifts Delta_{k,F} (rad/s) of level F while microwave source k is on.
struct AcZeemanInputs {
    double delta_1_7 = 0.0;
    double delta_1_8 = 0.0;
    double delta_2_6 = 0.0;
    double delta_2_7 = 0.0;
    double tau_1 = 0.01;
    double tau_2 = 0.01;
    double ramsey_time = 1.0;
};

struct ClockShift {
    double angular = 0.0;    // rad/s
    double hz = 0.0;
    double fractional = 0.0;
};

inline ClockShift ac_zeeman_clock_shift(const AcZeemanInputs& in, double clock_frequency_hz) {
    if (!(in.tau_1 > 0.0) || !(in.tau_2 > 0.0) || !(in.ramsey_time > 0.0)) {
        throw DomainError("tau_1, tau_2 and T must be positive");
    }
    ClockShift s;
    s.angular = ((in.delta_1_7 + in.delta_1_8) * in.tau_1 + (in.delta_2_6 + in.delta_2_7) * in.tau_2) /
                (3.0 * (in.ramsey_time + in.tau_1 + in.tau_2));
    s.hz = angular_to_hz(s.angular);
    s.fractional = s.hz / clock_frequency_hz;
    return s;
}

/// Level scheme used to turn measured pi times into off-resonant couplings.
struct AcZeemanModel {
    PiTimeTable pi_times;
    double table_rabi_reference = 3.5e-3; // pi time the table is scaled from, s
    double pulse_pi_time = 10e-3;         // pi time used in the sequence, s
    double b_field = 100e-6;              // T
    PerLevel g_factor{-1.0 / 14.0, 1.0 / 112.0, 1.0 / 16.0}; // F = 6, 7, 8
    /// Ratio of the |8,0> <-> |7,m> to |7,0> <-> |8,m> coupling, and the same
    /// for F=6.
    double cg_ratio_8 = 0.8819171036881969;
    double cg_ratio_6 = 1.1547005383792515;

    /// Zeeman shift of |F,m>, rad/s.
    double zeeman(UpperLevel f, int m) const {
        return hz_to_angular(g_factor[index_of(f)] * m * constants::bohr_magneton_hz_per_t * b_field);
    }

    /// Rabi rate for |7,0> <-> |F,m> at the sequence's pulse strength.
    double rabi(int f, int m) const {
        return kPi / pi_times.get(f, m) * (table_rabi_reference / pulse_pi_time);
    }
};

namespace detail {

/// Shift of `level` from a coupling to `partner`, with the drive tuned to the
/// m=0 resonance. Energy ordering is 6 > 7 > 8.
inline OffResonantCoupling sideband(double rabi, double z_upper, double z_lower, bool level_is_upper) {
    return {rabi, -(z_upper - z_lower), level_is_upper ? -1.0 : 1.0};
}

} // namespace detail

struct AcZeemanCouplings {
    std::vector<OffResonantCoupling> c_1_7, c_1_8, c_2_6, c_2_7;
};

/// Off-resonant sigma couplings for each (source, level) pair.
inline AcZeemanCouplings default_ac_zeeman_couplings(const AcZeemanModel& m) {
    m.pi_times.validate();
    using U = UpperLevel;
    AcZeemanCouplings c;
    for (int q : {-1, 1}) {
        // Source 1 (8 <-> 7): |7,0> with |8,q>, |8,0> with |7,q>.
        c.c_1_7.push_back(detail::sideband(m.rabi(8, q), 0.0, m.zeeman(U::F8, q), true));
        c.c_1_8.push_back(
            detail::sideband(m.rabi(8, q) * m.cg_ratio_8, m.zeeman(U::F7, q), 0.0, false));
        // Source 2 (7 <-> 6): |7,0> with |6,q>, |6,0> with |7,q>.
        c.c_2_7.push_back(detail::sideband(m.rabi(6, q), m.zeeman(U::F6, q), 0.0, false));
        c.c_2_6.push_back(
            detail::sideband(m.rabi(6, q) * m.cg_ratio_6, 0.0, m.zeeman(U::F7, q), true));
    }
    return c;
}

inline AcZeemanInputs ac_zeeman_inputs(const AcZeemanCouplings& c, double tau_1, double tau_2,
                                       double ramsey_time) {
    AcZeemanInputs in;
    in.delta_1_7 = off_resonant_shift(c.c_1_7);
    in.delta_1_8 = off_resonant_shift(c.c_1_8);
    in.delta_2_6 = off_resonant_shift(c.c_2_6);
    in.delta_2_7 = off_resonant_shift(c.c_2_7);
    in.tau_1 = tau_1;
    in.tau_2 = tau_2;
    in.ramsey_time = ramsey_time;
    return in;
}

/// Quadratic Zeeman coefficients, Hz/T^2.
struct QuadraticZeemanSensitivities {
    PerLevel level{2.27e-3 * 1e12, -0.12e-3 * 1e12, -2.15e-3 * 1e12};
    double averaged = -4.7e-6 * 1e12;
};

struct QuadraticZeemanShifts {
    PerLevel level{};     // Hz
    double averaged = 0.0; // Hz
    double level_mean = 0.0;
    bool discrepancy = false; // |averaged - level_mean| > 10% of |averaged|
};

inline QuadraticZeemanShifts quadratic_zeeman(double b, const QuadraticZeemanSensitivities& s = {}) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("field must be non-negative");
    QuadraticZeemanShifts out;
    const double b2 = b * b;
    for (std::size_t i = 0; i < 3; ++i) out.level[i] = s.level[i] * b2;
    out.averaged = s.averaged * b2;
    out.level_mean = (out.level[0] + out.level[1] + out.level[2]) / 3.0;
    out.discrepancy = std::abs(out.averaged - out.level_mean) > 0.1 * std::abs(out.averaged);
    return out;
}

} // namespace lutclock
