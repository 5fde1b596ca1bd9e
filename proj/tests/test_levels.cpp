#include <gtest/gtest.h>

#include <lutclock/levels.hpp>

using namespace lutclock;

TEST(SignedCombinations, SumToZero) {
    const auto c = signed_combinations(3.0, 5.0);
    EXPECT_DOUBLE_EQ(c.f6, 13.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.f7, -2.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.f8, -11.0 / 3.0);
    EXPECT_NEAR(c.f6 + c.f7 + c.f8, 0.0, 1e-15);
}

TEST(SignedCombinations, ReproduceLevelOffsets) {
    const LevelSystem lv(27.0, 20.0, 11.0);
    const auto c = signed_combinations(lv.omega_1(), lv.omega_2());
    const double avg = hyperfine_average(lv);
    EXPECT_NEAR(c.f6, lv.omega_6() - avg, 1e-13);
    EXPECT_NEAR(c.f7, lv.omega_7() - avg, 1e-13);
    EXPECT_NEAR(c.f8, lv.omega_8() - avg, 1e-13);
}

TEST(LevelSystem, SplittingsAndOrdering) {
    const auto lv = LevelSystem::from_splittings(100.0, 7.0, 9.0);
    EXPECT_DOUBLE_EQ(lv.omega_1(), 7.0);
    EXPECT_DOUBLE_EQ(lv.omega_2(), 9.0);
    EXPECT_THROW(LevelSystem(1.0, 2.0, 0.0), DomainError);
    EXPECT_THROW(LevelSystem(3.0, 2.0, std::nan("")), DomainError);
}

TEST(LevelSystem, CommonShiftMovesAverageOnly) {
    const LevelSystem lv(27.0, 20.0, 11.0);
    const auto s = lv.shifted({0.0, 0.0, 0.0}, 4.0);
    EXPECT_DOUBLE_EQ(hyperfine_average(s), hyperfine_average(lv) + 4.0);
    EXPECT_DOUBLE_EQ(s.omega_1(), lv.omega_1());
    EXPECT_DOUBLE_EQ(s.omega_2(), lv.omega_2());
}

TEST(FrameParams, DetuningsFromDrives) {
    const LevelSystem lv(27.0, 20.0, 11.0);
    DriveFrequencies d;
    d.omega_p1 = 9.5;
    d.omega_p2 = 7.0;
    const auto bar_p = signed_combinations(d.omega_p1, d.omega_p2).as_array();
    d.omega_laser = hyperfine_average(lv) + bar_p[1] + 0.25;
    const auto f = frame_params(lv, d, UpperLevel::F7);
    EXPECT_NEAR(f.delta, 0.25, 1e-13);
    const auto bar = signed_combinations(lv.omega_1(), lv.omega_2()).as_array();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.Delta[i], bar_p[i] - bar[i], 1e-13);
    EXPECT_NEAR(f.Delta[0] + f.Delta[1] + f.Delta[2], 0.0, 1e-13);
}

TEST(FrameParams, RejectsBadMicrowaves) {
    const LevelSystem lv(27.0, 20.0, 11.0);
    DriveFrequencies d;
    d.omega_p1 = -1.0;
    d.omega_p2 = 7.0;
    EXPECT_THROW(frame_params(lv, d, UpperLevel::F7), DomainError);
}

TEST(UpperLevel, Indexing) {
    EXPECT_EQ(f_number(UpperLevel::F6), 6);
    EXPECT_EQ(upper_level_from_f(8), UpperLevel::F8);
    EXPECT_THROW(upper_level_from_f(5), DomainError);
}
