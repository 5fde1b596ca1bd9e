#include <gtest/gtest.h>

#include <lutclock/shifts.hpp>

using namespace lutclock;

TEST(OffResonant, SingleCoupling) {
    const double s = off_resonant_shift({{2.0, 40.0, 1.0}, {2.0, -40.0, -1.0}});
    EXPECT_DOUBLE_EQ(s, 2.0 * 4.0 / 160.0);
    EXPECT_THROW(off_resonant_shift({{2.0, 19.0, 1.0}}), DomainError);
}

TEST(PiTimes, Lookup) {
    const PiTimeTable t;
    EXPECT_DOUBLE_EQ(t.get(8, -1), 23e-3);
    EXPECT_DOUBLE_EQ(t.get(6, 1), 9e-3);
    EXPECT_THROW(t.get(7, 0), DomainError);
    EXPECT_THROW(t.get(6, 2), DomainError);
}

TEST(AcZeeman, ClockShiftFormula) {
    AcZeemanInputs in;
    in.delta_1_7 = 1.0;
    in.delta_1_8 = 2.0;
    in.delta_2_6 = 3.0;
    in.delta_2_7 = 4.0;
    in.tau_1 = 0.01;
    in.tau_2 = 0.02;
    in.ramsey_time = 1.0;
    const auto s = ac_zeeman_clock_shift(in, 1.0);
    EXPECT_NEAR(s.angular, (3.0 * 0.01 + 7.0 * 0.02) / (3.0 * 1.03), 1e-15);
    in.ramsey_time = 0.0;
    EXPECT_THROW(ac_zeeman_clock_shift(in, 1.0), DomainError);
}

TEST(AcZeeman, DefaultModelBudget) {
    const AcZeemanModel m;
    const auto in = ac_zeeman_inputs(default_ac_zeeman_couplings(m), 0.01, 0.01, 1.0);
    EXPECT_NEAR(angular_to_hz(in.delta_1_7), -5.335788436921195e-05, 1e-15);
    EXPECT_NEAR(angular_to_hz(in.delta_1_8), -2.90504037121265e-04, 1e-15);
    EXPECT_NEAR(angular_to_hz(in.delta_2_6), 6.58612866377384e-03, 1e-14);
    EXPECT_NEAR(angular_to_hz(in.delta_2_7), -6.174495622287978e-04, 1e-15);
    const auto s = ac_zeeman_clock_shift(in, 353.5e12);
    EXPECT_NEAR(s.hz, 1.838175549037441e-05, 1e-15);
    EXPECT_GT(s.fractional, 5e-21);
    EXPECT_LT(s.fractional, 8e-20);
}

TEST(QuadraticZeeman, LevelsAndAverage) {
    const auto q = quadratic_zeeman(100e-6);
    EXPECT_NEAR(q.level[0], 22.7, 1e-11);
    EXPECT_NEAR(q.level[1], -1.2, 1e-12);
    EXPECT_NEAR(q.level[2], -21.5, 1e-11);
    EXPECT_NEAR(q.averaged, -0.047, 1e-14);
    EXPECT_NEAR(q.level_mean, 0.0, 1e-12);
    EXPECT_TRUE(q.discrepancy);
    EXPECT_THROW(quadratic_zeeman(-1.0), DomainError);
}
