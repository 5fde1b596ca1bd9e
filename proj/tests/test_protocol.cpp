#include <gtest/gtest.h>

#include <lutclock/protocol.hpp>

using namespace lutclock;

namespace {

LevelSystem clock_levels() {
    return LevelSystem::from_splittings(0.0, hz_to_angular(10.49e9), hz_to_angular(11.29e9));
}

RamseyScenario scenario(PerLevel eps_hz, MicrowaveModel model) {
    RamseyScenario sc{clock_levels(), {}, 0.0, {}, {}};
    sc.offsets = {hz_to_angular(eps_hz[0]), hz_to_angular(eps_hz[1]), hz_to_angular(eps_hz[2])};
    sc.params.microwave = model;
    return sc;
}

std::vector<UpperLevel> dwell_levels(const Sequence& seq) {
    std::vector<UpperLevel> out;
    for (const auto& s : seq.segments) {
        if (s.kind == SegmentKind::dwell) out.push_back(s.occupied);
    }
    return out;
}

} // namespace

TEST(DecoupledSequence, StructureForEachStartLevel) {
    using U = UpperLevel;
    const std::vector<std::pair<U, std::vector<U>>> cases{
        {U::F7, {U::F7, U::F8, U::F6}}, {U::F8, {U::F8, U::F7, U::F6}}, {U::F6, {U::F6, U::F7, U::F8}}};
    for (const auto& [start, dwells] : cases) {
        ProtocolParams p;
        p.start = start;
        p.ramsey_time = 0.5;
        p.tau_1 = 0.01;
        p.tau_2 = 0.02;
        const auto seq = build_decoupled_ramsey(p, explicit_frame(0.0, {0.0, 0.0, 0.0}));
        EXPECT_EQ(seq.segments.size(), 9u);
        EXPECT_EQ(seq.segments.front().kind, SegmentKind::optical_pulse);
        EXPECT_EQ(seq.segments.back().kind, SegmentKind::optical_pulse);
        EXPECT_EQ(dwell_levels(seq), dwells);
        const auto ledger = occupancy_ledger(seq);
        for (U f : kUpperLevels) EXPECT_NEAR(ledger.of(f), 0.53, 1e-15);
        EXPECT_NEAR(interrogation_time(p, SequenceKind::decoupled), 1.59, 1e-15);
    }
}

TEST(DecoupledSequence, ZeroRamseyTimeKeepsBalance) {
    ProtocolParams p;
    p.ramsey_time = 0.0;
    const auto seq = build_decoupled_ramsey(p, explicit_frame(0.0, {0.0, 0.0, 0.0}));
    const auto ledger = occupancy_ledger(seq);
    for (UpperLevel f : kUpperLevels) EXPECT_NEAR(ledger.of(f), 0.02, 1e-15);
}

TEST(DecoupledSequence, RejectsBadParameters) {
    ProtocolParams p;
    p.tau_1 = -1e-3;
    EXPECT_THROW(build_decoupled_ramsey(p, explicit_frame(0.0, {0.0, 0.0, 0.0})), DomainError);
    EXPECT_THROW(detail::source_between(UpperLevel::F6, UpperLevel::F8), ConstructionError);
}

TEST(PhaseLedger, MatchesSimulationWithIdealPulses) {
    ProtocolParams p;
    p.microwave = MicrowaveModel::ideal;
    p.ramsey_time = 0.8;
    p.tau_1 = 0.013;
    p.tau_2 = 0.004;
    const auto frame = explicit_frame(1.7, {2.0, -0.5, 3.1});
    EXPECT_NEAR(wrap_phase(simulated_upper_phase(p, frame) - upper_phase_ledger(p, frame)), 0.0, 1e-9);
}

TEST(PhaseLedger, ZeroSumDetuningsLeaveOnlyPulseTerms) {
    ProtocolParams p;
    p.tau_1 = 0.0;
    p.tau_2 = 0.0;
    EXPECT_NEAR(upper_phase_ledger(p, explicit_frame(0.0, {2.0, -0.5, -1.5})), 0.0, 1e-15);
}

TEST(PhaseLedger, WrapPhase) {
    EXPECT_NEAR(wrap_phase(3.0 * kPi + 0.1), -kPi + 0.1, 1e-12);
    EXPECT_NEAR(wrap_phase(-0.2), -0.2, 1e-15);
}

TEST(Fringe, PlainCentreFollowsTensorShift) {
    const auto sc = scenario({-5.0, 5.0, 0.0}, MicrowaveModel::ideal);
    const double c = angular_to_hz(track_central_fringe(sc, SequenceKind::plain));
    EXPECT_NEAR(c, 5.0, 1e-4);
}

TEST(Fringe, DecoupledCentreCancelsTensorShift) {
    const auto sc = scenario({-5.0, 5.0, 0.0}, MicrowaveModel::ideal);
    const double c = angular_to_hz(track_central_fringe(sc, SequenceKind::decoupled));
    EXPECT_LT(std::abs(c), 1e-3);
}

TEST(Fringe, DecoupledCentreFollowsCommonShift) {
    auto sc = scenario({0.0, 0.0, 0.0}, MicrowaveModel::ideal);
    sc.common_shift = hz_to_angular(0.3);
    const double c = angular_to_hz(track_central_fringe(sc, SequenceKind::decoupled));
    EXPECT_NEAR(c, 0.3, 1e-3);
}

TEST(Fringe, MicrowaveCentreMeasuresSplittingShift) {
    const auto sc = scenario({-0.6, 0.6, 0.0}, MicrowaveModel::physical);
    const double c = angular_to_hz(track_central_fringe(sc, SequenceKind::microwave));
    EXPECT_NEAR(c, 0.6, 1e-3);
}

TEST(Fringe, BoundaryMaximumIsReported) {
    const auto scan = fringe_scan([](double x) { return std::exp(-x * x); }, 5.0, 1.0, 21, 1);
    EXPECT_THROW(central_fringe(scan, 5.0), ScanRangeError);
    const auto good = fringe_scan([](double x) { return std::exp(-x * x); }, 0.2, 1.0, 21, 1);
    EXPECT_NEAR(central_fringe(good, 0.2), 0.0, 1e-12);
}

TEST(Fringe, ScanIsWorkerInvariant) {
    const auto sc = scenario({-1.0, 1.0, 0.0}, MicrowaveModel::physical);
    auto f = [&](double x) { return excitation(sc, SequenceKind::decoupled, x); };
    const auto a = fringe_scan(f, 0.0, 2.0, 31, 1);
    const auto b = fringe_scan(f, 0.0, 2.0, 31, 3);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].excitation, b.points[i].excitation);
    }
}
