#pragma once

// Exact propagation of the four-level state (g, 6, 7, 8) under the
// piecewise-constant rotating-frame Hamiltonian
//
//   H = delta |g><g| - sum_F Delta_F |F><F|
//       + (Omega_L/2) (e^{i phi_L} |F_addr><g| + h.c.)
//       + (Omega_2/2) (e^{i phi_2} |6><7| + h.c.)
//       + (Omega_1/2) (e^{i phi_1} |8><7| + h.c.)
//
// Each segment is time independent, so its propagator is built from a
// Hermitian eigendecomposition instead of an ODE integrator.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "levels.hpp"
#include "units.hpp"

namespace lutclock {

using Complex = std::complex<double>;
using Matrix4 = Eigen::Matrix<Complex, 4, 4>;
using Vector4 = Eigen::Matrix<Complex, 4, 1>;
using Matrix2 = Eigen::Matrix<Complex, 2, 2>;

/// Basis index of the ground state; upper levels follow as 1 + index_of(F).
inline constexpr int kGround = 0;
constexpr int basis_index(UpperLevel f) { return 1 + static_cast<int>(f); }

/// Rabi rate <-> pi-pulse duration. With the coupling written as Omega/2 a
/// resonant pi pulse takes pi/Omega; durations are the ground truth and this
/// is the only place the relation lives.
inline double rabi_for_pi_pulse(double duration) { return kPi / duration; }
inline double pi_pulse_duration(double rabi) { return kPi / rabi; }
inline double rabi_for_pulse_area(double area, double duration) { return area / duration; }

struct StateVector {
    Vector4 amp = Vector4::Zero();

    static StateVector ground() {
        StateVector s;
        s.amp(kGround) = 1.0;
        return s;
    }
    static StateVector upper(UpperLevel f) {
        StateVector s;
        s.amp(basis_index(f)) = 1.0;
        return s;
    }

    Complex& operator[](int i) { return amp(i); }
    const Complex& operator[](int i) const { return amp(i); }

    Complex ground_amplitude() const { return amp(kGround); }
    Complex amplitude(UpperLevel f) const { return amp(basis_index(f)); }

    double population(int i) const { return std::norm(amp(i)); }
    double population(UpperLevel f) const { return population(basis_index(f)); }
    double upper_population() const { return 1.0 - std::norm(amp(kGround)); }
    double norm() const { return amp.norm(); }
};

struct Drive {
    double rabi = 0.0;  // rad/s, or pulse area (rad) for instantaneous segments
    double phase = 0.0; // rad
};

/// What a segment is for; the builder records it so that occupancy ledgers
/// and tests can walk a sequence without re-deriving its structure.
enum class SegmentKind { dwell, optical_pulse, microwave_pulse };

struct PulseSegment {
    double duration = 0.0;
    Drive optical;
    Drive mw1; // 8 <-> 7
    Drive mw2; // 7 <-> 6
    FrameParams frame;

    /// Replace the two microwave-coupled levels' diagonal entries by their
    /// mean while a microwave drive is on. This keeps the global phase of the
    /// pulse (the part that matters for hyperfine averaging) and makes the
    /// transfer exactly resonant.
    bool resonant_microwave = false;

    /// Zero-duration pulse: drives carry pulse areas instead of rates and only
    /// the coupling part of H acts.
    bool instantaneous = false;

    SegmentKind kind = SegmentKind::dwell;
    UpperLevel occupied = UpperLevel::F7; // dwell: intended occupied level

    bool any_microwave() const { return mw1.rabi != 0.0 || mw2.rabi != 0.0; }
};

struct Sequence {
    std::vector<PulseSegment> segments;

    double total_duration() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }
};

namespace detail {

inline void validate_segment(const PulseSegment& seg) {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(seg.duration) || seg.duration < 0.0) {
        throw DomainError("segment duration must be finite and non-negative");
    }
    for (const Drive* d : {&seg.optical, &seg.mw1, &seg.mw2}) {
        if (!finite(d->rabi) || d->rabi < 0.0 || !finite(d->phase)) {
            throw DomainError("drive rates must be finite and non-negative");
        }
    }
    if (!finite(seg.frame.delta)) throw DomainError("non-finite laser detuning");
    for (double D : seg.frame.Delta) {
        if (!finite(D)) throw DomainError("non-finite frame detuning");
    }
    if (seg.instantaneous && seg.duration != 0.0) {
        throw DomainError("instantaneous segments must have zero duration");
    }
}

inline void add_coupling(Matrix4& h, int upper, int lower, const Drive& d) {
    if (d.rabi == 0.0) return;
    const Complex c = 0.5 * d.rabi * std::polar(1.0, d.phase);
    h(upper, lower) += c;
    h(lower, upper) += std::conj(c);
}

inline Matrix4 coupling_matrix(const PulseSegment& seg) {
    Matrix4 h = Matrix4::Zero();
    add_coupling(h, basis_index(seg.frame.addressed), kGround, seg.optical);
    add_coupling(h, basis_index(UpperLevel::F6), basis_index(UpperLevel::F7), seg.mw2);
    add_coupling(h, basis_index(UpperLevel::F8), basis_index(UpperLevel::F7), seg.mw1);
    return h;
}

} // namespace detail

inline Matrix4 hamiltonian_matrix(const PulseSegment& seg) {
    Matrix4 h = detail::coupling_matrix(seg);
    if (seg.instantaneous) return h;

    h(kGround, kGround) = seg.frame.delta;
    PerLevel diag{};
    for (std::size_t i = 0; i < 3; ++i) diag[i] = -seg.frame.Delta[i];

    if (seg.resonant_microwave) {
        auto level_mean = [&](UpperLevel a, UpperLevel b) {
            const double m = 0.5 * (diag[index_of(a)] + diag[index_of(b)]);
            diag[index_of(a)] = m;
            diag[index_of(b)] = m;
        };
        if (seg.mw1.rabi != 0.0) level_mean(UpperLevel::F7, UpperLevel::F8);
        if (seg.mw2.rabi != 0.0) level_mean(UpperLevel::F6, UpperLevel::F7);
    }
    for (UpperLevel f : kUpperLevels) {
        h(basis_index(f), basis_index(f)) = diag[index_of(f)];
    }
    return h;
}

/// exp(-i H t) for a Hermitian H.
template <int N>
Eigen::Matrix<Complex, N, N> hermitian_propagator(const Eigen::Matrix<Complex, N, N>& h,
                                                 double t) {
    using Mat = Eigen::Matrix<Complex, N, N>;
    if (h.isDiagonal(0.0)) {
        Mat u = Mat::Zero();
        for (int i = 0; i < N; ++i) u(i, i) = std::polar(1.0, -h(i, i).real() * t);
        return u;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success) {
        throw PropagationError("eigendecomposition did not converge");
    }
    Eigen::Matrix<Complex, N, 1> phases;
    for (int i = 0; i < N; ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix4 segment_propagator(const PulseSegment& seg) {
    detail::validate_segment(seg);
    const Matrix4 h = hamiltonian_matrix(seg);
    if (!h.allFinite()) throw PropagationError("non-finite Hamiltonian entry");
    if (seg.instantaneous) return hermitian_propagator<4>(h, 1.0);
    return hermitian_propagator<4>(h, seg.duration);
}

inline StateVector evolve_segment(const StateVector& state, const PulseSegment& seg) {
    StateVector out;
    out.amp = segment_propagator(seg) * state.amp;
    return out;
}

inline Matrix4 sequence_propagator(std::span<const PulseSegment> segments) {
    Matrix4 u = Matrix4::Identity();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        try {
            u = segment_propagator(segments[i]) * u;
        } catch (const PropagationError& e) {
            throw PropagationError(e.what(), static_cast<std::ptrdiff_t>(i));
        } catch (const DomainError& e) {
            throw PropagationError(e.what(), static_cast<std::ptrdiff_t>(i));
        }
    }
    return u;
}

inline StateVector run_segments(StateVector state, std::span<const PulseSegment> segments) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        try {
            state = evolve_segment(state, segments[i]);
        } catch (const PropagationError& e) {
            throw PropagationError(e.what(), static_cast<std::ptrdiff_t>(i));
        } catch (const DomainError& e) {
            throw PropagationError(e.what(), static_cast<std::ptrdiff_t>(i));
        }
    }
    return state;
}

inline StateVector run_sequence(const StateVector& state, const Sequence& seq) {
    if (seq.segments.empty()) throw ConstructionError("sequence has no segments");
    return run_segments(state, seq.segments);
}

/// Global phase picked up by a driven two-level subspace with diagonal
/// (delta1, delta2): the trace part commutes with the rest of H.
constexpr double commuting_split_phase(double delta1, double delta2, double /*omega*/,
                                       double t) {
    return -(delta1 + delta2) * t / 2.0;
}

/// Two-level Hamiltonian [[delta1, omega], [omega, delta2]].
inline Matrix2 two_level_hamiltonian(double delta1, double delta2, double omega) {
    Matrix2 h;
    h << delta1, omega, omega, delta2;
    return h;
}

} // namespace lutclock
