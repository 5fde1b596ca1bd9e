#pragma once

// Ramsey sequences with and without hyperfine averaging, laser-detuning
// scans, and central-fringe location.
//
// The decoupled sequence moves the upper-state amplitude through all three
// m=0 levels with two microwave pi pulses per transition. Counting each pulse
// as half occupancy of both of its levels, every level is occupied for
// T + tau_1 + tau_2, so rank-2 (zero-sum) level shifts drop out of the
// accumulated phase.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "levels.hpp"
#include "parallel.hpp"
#include "units.hpp"

namespace lutclock {

enum class MicrowaveModel {
    physical, // full detuned Hamiltonian during microwave pulses
    ideal     // exactly resonant transfer, global phase kept
};

struct ProtocolParams {
    double ramsey_time = 1.0;      // T, s
    double tau_1 = 0.01;           // 8<->7 pi-pulse duration, s
    double tau_2 = 0.01;           // 7<->6 pi-pulse duration, s
    UpperLevel start = UpperLevel::F7;
    double optical_pi_half = 1e-5; // s; zero gives an instantaneous pulse
    double second_pulse_phase = 0.0;
    MicrowaveModel microwave = MicrowaveModel::physical;

    double optical_rabi() const { return kPi / 2.0 / optical_pi_half; }

    void validate() const {
        if (!(ramsey_time >= 0.0) || !std::isfinite(ramsey_time)) {
            throw DomainError("Ramsey time must be finite and non-negative");
        }
        if (!(tau_1 >= 0.0) || !(tau_2 >= 0.0) || !std::isfinite(tau_1) ||
            !std::isfinite(tau_2)) {
            throw DomainError("microwave pi-pulse durations must be non-negative");
        }
        if (!(optical_pi_half >= 0.0) || !std::isfinite(optical_pi_half)) {
            throw DomainError("optical pulse duration must be non-negative");
        }
    }
};

/// Per-level frequency perturbations (rad/s). Pure tensor shifts sum to zero.
struct TensorOffsets {
    double eps_6 = 0.0;
    double eps_7 = 0.0;
    double eps_8 = 0.0;

    PerLevel as_array() const { return {eps_6, eps_7, eps_8}; }
    double sum() const { return eps_6 + eps_7 + eps_8; }
    double of(UpperLevel f) const { return as_array()[index_of(f)]; }
};

// ---------------------------------------------------------------------------
// Sequence construction

namespace detail {

inline PulseSegment optical_pulse(const ProtocolParams& p, const FrameParams& frame,
                                  double phase) {
    PulseSegment s;
    s.kind = SegmentKind::optical_pulse;
    s.frame = frame;
    s.optical.phase = phase;
    if (p.optical_pi_half == 0.0) {
        s.instantaneous = true;
        s.optical.rabi = kPi / 2.0;
    } else {
        s.duration = p.optical_pi_half;
        s.optical.rabi = p.optical_rabi();
    }
    return s;
}

/// Microwave pi pulse on source 1 (8<->7) or 2 (7<->6).
inline PulseSegment microwave_pi(int source, double duration, const ProtocolParams& p,
                                 const FrameParams& frame) {
    PulseSegment s;
    s.kind = SegmentKind::microwave_pulse;
    s.frame = frame;
    s.resonant_microwave = p.microwave == MicrowaveModel::ideal;
    Drive& d = source == 1 ? s.mw1 : s.mw2;
    if (duration == 0.0) {
        s.instantaneous = true;
        d.rabi = kPi;
    } else {
        s.duration = duration;
        d.rabi = rabi_for_pi_pulse(duration);
    }
    return s;
}

inline PulseSegment dwell(double duration, UpperLevel occupied, const FrameParams& frame) {
    PulseSegment s;
    s.kind = SegmentKind::dwell;
    s.duration = duration;
    s.occupied = occupied;
    s.frame = frame;
    return s;
}

/// Microwave source connecting two adjacent upper levels.
inline int source_between(UpperLevel a, UpperLevel b) {
    auto has = [&](UpperLevel f) { return a == f || b == f; };
    if (has(UpperLevel::F7) && has(UpperLevel::F8)) return 1;
    if (has(UpperLevel::F6) && has(UpperLevel::F7)) return 2;
    throw ConstructionError("no microwave transition connects F=" +
                            std::to_string(f_number(a)) + " and F=" +
                            std::to_string(f_number(b)));
}

/// Order of upper levels visited, starting and ending on the addressed one.
inline std::vector<UpperLevel> visit_order(UpperLevel start) {
    using U = UpperLevel;
    switch (start) {
    case U::F7: return {U::F7, U::F8, U::F7, U::F6, U::F7};
    case U::F8: return {U::F8, U::F7, U::F6, U::F7, U::F8};
    case U::F6: return {U::F6, U::F7, U::F8, U::F7, U::F6};
    }
    throw ConstructionError("unknown start level");
}

} // namespace detail

/// Time-integrated occupancy per upper level implied by the sequence layout:
/// dwell time plus half of every adjacent microwave pulse.
struct OccupancyLedger {
    PerLevel occupancy{};
    double of(UpperLevel f) const { return occupancy[index_of(f)]; }
};

inline OccupancyLedger occupancy_ledger(const Sequence& seq) {
    OccupancyLedger ledger;
    for (const auto& s : seq.segments) {
        if (s.kind == SegmentKind::dwell) {
            ledger.occupancy[index_of(s.occupied)] += s.duration;
        } else if (s.kind == SegmentKind::microwave_pulse) {
            if (s.mw1.rabi != 0.0) {
                ledger.occupancy[index_of(UpperLevel::F7)] += s.duration / 2.0;
                ledger.occupancy[index_of(UpperLevel::F8)] += s.duration / 2.0;
            }
            if (s.mw2.rabi != 0.0) {
                ledger.occupancy[index_of(UpperLevel::F6)] += s.duration / 2.0;
                ledger.occupancy[index_of(UpperLevel::F7)] += s.duration / 2.0;
            }
        }
    }
    return ledger;
}

/// Optical pi/2, hyperfine-averaging interrogation, optical pi/2.
/// Dwell times: T + tau_1 in |6>, T in |7>, T + tau_2 in |8>.
inline Sequence build_decoupled_ramsey(const ProtocolParams& p, const FrameParams& frame) {
    p.validate();
    FrameParams f = frame;
    f.addressed = p.start;

    auto dwell_time = [&](UpperLevel level) {
        switch (level) {
        case UpperLevel::F6: return p.ramsey_time + p.tau_1;
        case UpperLevel::F7: return p.ramsey_time;
        case UpperLevel::F8: return p.ramsey_time + p.tau_2;
        }
        return 0.0;
    };
    auto pulse_time = [&](int source) { return source == 1 ? p.tau_1 : p.tau_2; };

    const auto order = detail::visit_order(p.start);
    std::array<bool, 3> dwelt{};
    std::array<int, 3> pulses_per_source{}; // index 1, 2

    Sequence seq;
    seq.segments.push_back(detail::optical_pulse(p, f, 0.0));
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const UpperLevel here = order[i];
        if (!dwelt[index_of(here)]) {
            const double t = dwell_time(here);
            if (t > 0.0) seq.segments.push_back(detail::dwell(t, here, f));
            dwelt[index_of(here)] = true;
        }
        const int source = detail::source_between(here, order[i + 1]);
        ++pulses_per_source[source];
        seq.segments.push_back(detail::microwave_pi(source, pulse_time(source), p, f));
    }
    seq.segments.push_back(detail::optical_pulse(p, f, p.second_pulse_phase));

    if (pulses_per_source[1] != 2 || pulses_per_source[2] != 2 ||
        !std::all_of(dwelt.begin(), dwelt.end(), [](bool b) { return b; })) {
        throw ConstructionError("decoupled sequence must visit all levels with two pi pulses "
                                "per microwave transition");
    }
    const auto ledger = occupancy_ledger(seq);
    const double expected = p.ramsey_time + p.tau_1 + p.tau_2;
    for (double occ : ledger.occupancy) {
        if (std::abs(occ - expected) > 8.0 * std::numeric_limits<double>::epsilon() * expected) {
            throw ConstructionError("occupancy ledger is not balanced across levels");
        }
    }
    return seq;
}

/// Control: optical pi/2, free evolution T on the addressed level, optical pi/2.
inline Sequence build_plain_ramsey(const ProtocolParams& p, const FrameParams& frame) {
    p.validate();
    FrameParams f = frame;
    f.addressed = p.start;
    Sequence seq;
    seq.segments.push_back(detail::optical_pulse(p, f, 0.0));
    if (p.ramsey_time > 0.0) seq.segments.push_back(detail::dwell(p.ramsey_time, p.start, f));
    seq.segments.push_back(detail::optical_pulse(p, f, p.second_pulse_phase));
    return seq;
}

/// Microwave Ramsey on 8<->7: pi/2, free evolution, pi/2. Starts in |8>.
struct MicrowaveRamseyParams {
    double ramsey_time = 1.0;
    double pi_half = 5e-3;
    double second_pulse_phase = 0.0;
};

inline Sequence build_microwave_ramsey(const MicrowaveRamseyParams& p, const FrameParams& frame) {
    if (!(p.ramsey_time >= 0.0) || !(p.pi_half > 0.0)) {
        throw DomainError("microwave Ramsey needs T >= 0 and a finite pi/2 pulse");
    }
    auto pulse = [&](double phase) {
        PulseSegment s;
        s.kind = SegmentKind::microwave_pulse;
        s.frame = frame;
        s.duration = p.pi_half;
        s.mw1 = {rabi_for_pulse_area(kPi / 2.0, p.pi_half), phase};
        return s;
    };
    Sequence seq;
    seq.segments.push_back(pulse(0.0));
    if (p.ramsey_time > 0.0) {
        seq.segments.push_back(detail::dwell(p.ramsey_time, UpperLevel::F8, frame));
    }
    seq.segments.push_back(pulse(p.second_pulse_phase));
    return seq;
}

// ---------------------------------------------------------------------------
// Phase bookkeeping

/// Analytic upper-state phase over the interrogation:
///   T sum_F Delta_F + tau_1 Delta_6 + tau_2 Delta_8
///     + (Delta_8 + Delta_7) tau_1 + (Delta_7 + Delta_6) tau_2
inline double upper_phase_ledger(const ProtocolParams& p, const FrameParams& frame) {
    const double D6 = frame.detuning(UpperLevel::F6);
    const double D7 = frame.detuning(UpperLevel::F7);
    const double D8 = frame.detuning(UpperLevel::F8);
    return p.ramsey_time * (D6 + D7 + D8) + p.tau_1 * D6 + p.tau_2 * D8 +
           (D8 + D7) * p.tau_1 + (D7 + D6) * p.tau_2;
}

inline double wrap_phase(double phi) { return std::remainder(phi, kTwoPi); }

/// Interrogation part of a sequence: everything between the optical pulses.
inline std::span<const PulseSegment> interrogation_segments(const Sequence& seq) {
    if (seq.segments.size() < 2) throw ConstructionError("sequence has no optical pulses");
    return std::span<const PulseSegment>(seq.segments).subspan(1, seq.segments.size() - 2);
}

/// Upper-state phase extracted by propagating (|g> - i|F>)/sqrt(2) through
/// the interrogation and removing the ground-state contribution -delta*t.
/// Returned wrapped to (-pi, pi].
inline double simulated_upper_phase(const ProtocolParams& p, const FrameParams& frame) {
    FrameParams f = frame;
    f.addressed = p.start;
    const Sequence seq = build_decoupled_ramsey(p, f);
    const auto body = interrogation_segments(seq);

    StateVector psi;
    psi[kGround] = 1.0 / std::sqrt(2.0);
    psi[basis_index(p.start)] = Complex(0.0, -1.0 / std::sqrt(2.0));
    psi = run_segments(psi, body);

    double t = 0.0;
    for (const auto& s : body) t += s.duration;
    const double relative = std::arg(psi.amplitude(p.start) * std::conj(psi.ground_amplitude()));
    return wrap_phase(relative + kPi / 2.0 - f.delta * t);
}

/// Time over which the laser phase is compared with the atoms; the fringe
/// period in delta is 2 pi divided by this.
enum class SequenceKind { plain, decoupled, microwave };

inline double interrogation_time(const ProtocolParams& p, SequenceKind kind) {
    switch (kind) {
    case SequenceKind::decoupled: return 3.0 * (p.ramsey_time + p.tau_1 + p.tau_2);
    case SequenceKind::plain:
    case SequenceKind::microwave: return p.ramsey_time;
    }
    return p.ramsey_time;
}

// ---------------------------------------------------------------------------
// Scenarios: perturbed levels probed by drives tuned to the nominal levels.

struct RamseyScenario {
    LevelSystem nominal;
    TensorOffsets offsets;       // rad/s, per level
    double common_shift = 0.0;   // rad/s, common to the upper manifold
    ProtocolParams params;
    MicrowaveRamseyParams microwave_ramsey;

    LevelSystem perturbed() const { return nominal.shifted(offsets.as_array(), common_shift); }

    /// Drives on the nominal resonances; the laser sits `laser_detuning`
    /// above omega_0 + omega_bar'_F of the nominal system.
    DriveFrequencies drives(double laser_detuning, double microwave_detuning = 0.0) const {
        DriveFrequencies d;
        d.omega_p1 = nominal.omega_1() + microwave_detuning;
        d.omega_p2 = nominal.omega_2();
        const auto bar_p = signed_combinations(d.omega_p1, d.omega_p2).as_array();
        d.omega_laser = hyperfine_average(nominal) + bar_p[index_of(params.start)] + laser_detuning;
        return d;
    }

    FrameParams frame(double laser_detuning, double microwave_detuning = 0.0) const {
        return frame_params(perturbed(), drives(laser_detuning, microwave_detuning), params.start);
    }
};

/// Excitation probability at one scan point. For optical sequences the scan
/// variable is the laser detuning and the signal the total upper-state
/// population; for the microwave sequence it is the 8<->7 source detuning and
/// the population transferred to |7>.
inline double excitation(const RamseyScenario& sc, SequenceKind kind, double scan) {
    switch (kind) {
    case SequenceKind::plain:
        return run_sequence(StateVector::ground(), build_plain_ramsey(sc.params, sc.frame(scan)))
            .upper_population();
    case SequenceKind::decoupled:
        return run_sequence(StateVector::ground(),
                            build_decoupled_ramsey(sc.params, sc.frame(scan)))
            .upper_population();
    case SequenceKind::microwave: {
        const Sequence seq = build_microwave_ramsey(sc.microwave_ramsey, sc.frame(0.0, scan));
        return run_sequence(StateVector::upper(UpperLevel::F8), seq).population(UpperLevel::F7);
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Fringe scans

struct FringePoint {
    double detuning = 0.0;   // rad/s
    double excitation = 0.0; // probability
};

struct FringeScan {
    std::vector<FringePoint> points;
    ProtocolParams params;
};

/// Evaluates `prob(detuning)` on n evenly spaced points in [center - half_width,
/// center + half_width].
template <class Prob>
FringeScan fringe_scan(Prob&& prob, double center, double half_width, std::size_t n,
                       unsigned workers = 1) {
    if (n < 3) throw DomainError("a fringe scan needs at least 3 points");
    if (!(half_width > 0.0)) throw DomainError("scan half-width must be positive");
    FringeScan scan;
    scan.points.resize(n);
    const double step = 2.0 * half_width / static_cast<double>(n - 1);
    parallel_for(n, workers, [&](std::size_t i) {
        const double x = center - half_width + step * static_cast<double>(i);
        const double p = prob(x);
        scan.points[i] = {x, std::clamp(p, 0.0, 1.0)};
    });
    return scan;
}

/// Maxima whose refined log-heights differ by less than this are treated as
/// equal; the one closest to the scan centre is the central fringe.
inline constexpr double kFringeTieTolerance = 1e-3;

/// Detuning of the central-fringe maximum, refined with a three-point parabola
/// on log-excitation around each interior local maximum.
inline double central_fringe(const FringeScan& scan, double center = 0.0) {
    const auto& pts = scan.points;
    const std::size_t n = pts.size();
    if (n < 3) throw DomainError("a fringe scan needs at least 3 points");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::log(std::max(pts[i].excitation, std::numeric_limits<double>::min()));
    }
    const double h = pts[1].detuning - pts[0].detuning;

    struct Peak {
        double x;
        double height;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] >= y[i - 1] && y[i] > y[i + 1])) continue;
        const double curvature = y[i - 1] - 2.0 * y[i] + y[i + 1];
        const double slope = y[i - 1] - y[i + 1];
        if (curvature < 0.0) {
            peaks.push_back({pts[i].detuning + h * slope / (2.0 * curvature),
                             y[i] - slope * slope / (8.0 * curvature)});
        } else {
            peaks.push_back({pts[i].detuning, y[i]});
        }
    }
    if (peaks.empty()) throw ScanRangeError("no interior maximum: scan range inadequate");

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pk : peaks) best = std::max(best, pk.height);
    if (std::max(y.front(), y.back()) > best + kFringeTieTolerance) {
        throw ScanRangeError("global maximum lies on the scan boundary");
    }

    const Peak* chosen = nullptr;
    for (const auto& pk : peaks) {
        if (pk.height < best - kFringeTieTolerance) continue;
        if (!chosen || std::abs(pk.x - center) < std::abs(chosen->x - center)) chosen = &pk;
    }
    return chosen->x;
}

struct FringeTrackOptions {
    int rungs = 6;                  // Ramsey times T/2^(rungs-1) ... T
    double window_fringes = 1.2;    // half-width in fringe periods
    std::size_t points = 121;
    double initial_center = 0.0;
    unsigned workers = 1;
};

/// Locates the central fringe by scanning at increasing Ramsey time, each
/// rung centred on the previous estimate. Short rungs have wide fringes and
/// fix which fringe is central; the last rung gives the resolution.
inline double track_central_fringe(const RamseyScenario& scenario, SequenceKind kind,
                                   const FringeTrackOptions& opt = {}) {
    if (opt.rungs < 1) throw DomainError("fringe tracking needs at least one rung");
    double center = opt.initial_center;
    for (int k = opt.rungs - 1; k >= 0; --k) {
        RamseyScenario sc = scenario;
        const double scale = std::ldexp(1.0, -k);
        sc.params.ramsey_time = scenario.params.ramsey_time * scale;
        sc.microwave_ramsey.ramsey_time = scenario.microwave_ramsey.ramsey_time * scale;
        const double t_int = kind == SequenceKind::microwave
                                 ? sc.microwave_ramsey.ramsey_time
                                 : interrogation_time(sc.params, kind);
        if (!(t_int > 0.0)) throw DomainError("fringe tracking needs a positive Ramsey time");
        const double period = kTwoPi / t_int;
        const FringeScan scan = fringe_scan(
            [&](double x) { return excitation(sc, kind, x); }, center,
            opt.window_fringes * period, opt.points, opt.workers);
        center = central_fringe(scan, center);
    }
    return center;
}

} // namespace lutclock
