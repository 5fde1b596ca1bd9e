#include <gtest/gtest.h>

#include <random>

#include <lutclock/dynamics.hpp>

using namespace lutclock;

namespace {

PulseSegment optical(double rabi, double duration, double delta = 0.0, double D7 = 0.0) {
    PulseSegment s;
    s.kind = SegmentKind::optical_pulse;
    s.duration = duration;
    s.optical.rabi = rabi;
    s.frame = explicit_frame(delta, {0.0, D7, 0.0});
    return s;
}

} // namespace

TEST(Dynamics, ResonantPiPulseTransfersPopulation) {
    const double tau = 1e-5;
    const auto psi = evolve_segment(StateVector::ground(), optical(rabi_for_pi_pulse(tau), tau));
    EXPECT_NEAR(psi.population(UpperLevel::F7), 1.0, 1e-12);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
}

TEST(Dynamics, DetunedRabiFormula) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double omega = 1.0 + 9.0 * u(gen);
        const double delta = -5.0 + 10.0 * u(gen);
        const double D7 = -5.0 + 10.0 * u(gen);
        const double t = 3.0 * u(gen);
        const double d = delta + D7; // H_gg - H_77
        const double w = std::sqrt(omega * omega + d * d);
        const double expected = omega * omega / (w * w) * std::pow(std::sin(w * t / 2.0), 2);
        const auto psi = evolve_segment(StateVector::ground(), optical(omega, t, delta, D7));
        EXPECT_NEAR(psi.population(UpperLevel::F7), expected, 1e-12);
    }
}

TEST(Dynamics, PropagatorIsUnitaryAndComposes) {
    PulseSegment s;
    s.duration = 0.37;
    s.optical = {2.1, 0.4};
    s.mw1 = {1.3, -0.2};
    s.mw2 = {0.7, 1.1};
    s.frame = explicit_frame(0.3, {0.5, -0.1, -0.4});
    const Matrix4 u = segment_propagator(s);
    EXPECT_LT((u.adjoint() * u - Matrix4::Identity()).norm(), 1e-12);

    PulseSegment half = s;
    half.duration = s.duration / 2.0;
    const std::vector<PulseSegment> two{half, half};
    EXPECT_LT((sequence_propagator(two) - u).norm(), 1e-12);
}

TEST(Dynamics, DwellAccumulatesFramePhases) {
    PulseSegment s;
    s.duration = 2.0;
    s.frame = explicit_frame(0.25, {0.5, -0.1, -0.4});
    const Matrix4 u = segment_propagator(s);
    EXPECT_NEAR(std::arg(u(kGround, kGround)), -0.5, 1e-12);
    EXPECT_NEAR(std::arg(u(basis_index(UpperLevel::F6), basis_index(UpperLevel::F6))), 1.0, 1e-12);
    EXPECT_NEAR(std::arg(u(basis_index(UpperLevel::F8), basis_index(UpperLevel::F8))), -0.8, 1e-12);
}

TEST(Dynamics, InstantaneousPulseCarriesArea) {
    PulseSegment s;
    s.instantaneous = true;
    s.optical.rabi = kPi / 2.0;
    s.frame = explicit_frame(100.0, {10.0, 20.0, 30.0});
    const auto psi = evolve_segment(StateVector::ground(), s);
    EXPECT_NEAR(psi.population(UpperLevel::F7), 0.5, 1e-12);
    s.duration = 1.0;
    EXPECT_THROW(segment_propagator(s), DomainError);
}

TEST(Dynamics, IdealMicrowaveTransferIsExactUnderDetuning) {
    PulseSegment s;
    s.kind = SegmentKind::microwave_pulse;
    s.duration = 0.01;
    s.mw1.rabi = rabi_for_pi_pulse(s.duration);
    s.frame = explicit_frame(0.0, {0.0, 3.0, -3.0});
    s.resonant_microwave = true;
    const auto ideal = evolve_segment(StateVector::upper(UpperLevel::F7), s);
    EXPECT_NEAR(ideal.population(UpperLevel::F8), 1.0, 1e-12);
    s.resonant_microwave = false;
    const auto physical = evolve_segment(StateVector::upper(UpperLevel::F7), s);
    EXPECT_LT(physical.population(UpperLevel::F8), 1.0 - 1e-6);
}

TEST(Dynamics, ErrorsCarrySegmentIndex) {
    std::vector<PulseSegment> segs(3, optical(1.0, 0.1));
    segs[2].frame.delta = std::nan("");
    try {
        run_segments(StateVector::ground(), segs);
        FAIL() << "expected PropagationError";
    } catch (const PropagationError& e) {
        EXPECT_EQ(e.segment(), 2);
    }
    segs[2] = optical(-1.0, 0.1);
    EXPECT_THROW(sequence_propagator(segs), PropagationError);
    EXPECT_THROW(run_sequence(StateVector::ground(), Sequence{}), ConstructionError);
}
