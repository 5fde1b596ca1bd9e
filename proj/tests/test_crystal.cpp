#include <gtest/gtest.h>

#include <lutclock/crystal.hpp>
#include <lutclock/estimator.hpp>

using namespace lutclock;

namespace {

TrapConfig three_ions() {
    TrapConfig cfg;
    cfg.b_gradient = 113e-6;
    cfg.micromotion_offset = {0.0047, 0.0, 0.0047};
    return cfg;
}

} // namespace

TEST(Crystal, LengthScale) {
    const TrapConfig cfg;
    EXPECT_NEAR(crystal_length_scale(cfg.ion_mass, cfg.omega_z), 1.0488775992142578e-05, 1e-17);
}

TEST(Crystal, TwoAndThreeIonEquilibria) {
    const auto two = dimensionless_equilibrium(2);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(two[1], std::cbrt(0.25), 1e-12);
    EXPECT_NEAR(two[0], -two[1], 1e-15);

    const auto three = dimensionless_equilibrium(3);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_NEAR(three[2], std::cbrt(1.25), 1e-12);
    EXPECT_NEAR(three[1], 0.0, 1e-15);
}

TEST(Crystal, ManyIonsAreOrderedAndBalanced) {
    const auto u = dimensionless_equilibrium(12);
    for (std::size_t i = 1; i < u.size(); ++i) EXPECT_LT(u[i - 1], u[i]);
    const auto g = detail::crystal_gradient(Eigen::Map<const Eigen::VectorXd>(u.data(), 12));
    EXPECT_LT(g.norm(), 1e-10);
}

TEST(Crystal, ThreeIonSpacing) {
    const auto c = equilibrium_positions(three_ions());
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c.positions[2] - c.positions[1], 1.1298691426722779e-05, 1e-16);
}

TEST(Crystal, QuadrupoleShiftsReproduceDifferenceFormula) {
    const TrapConfig cfg = three_ions();
    const auto c = equilibrium_positions(cfg);
    const auto q = quadrupole_shifts(c, cfg, 0.634);
    EXPECT_NEAR(q[0], q[2], 1e-12);
    EXPECT_GT(q[1], q[0]);
    EXPECT_NEAR(q[1] - q[0], 0.5999862250620799, 1e-9);
    EXPECT_NEAR(q[1] - q[0], quadrupole_difference_hz(0.634, 0.0, cfg.ion_mass, cfg.omega_z), 1e-9);
}

TEST(Crystal, ZeemanGradientIsAntisymmetric) {
    const TrapConfig cfg = three_ions();
    const auto c = equilibrium_positions(cfg);
    const auto z = zeeman_gradient_shifts(c, cfg, 3.4e6);
    EXPECT_NEAR(z[1], 0.0, 1e-15);
    EXPECT_NEAR(z[2] - z[1], 0.004340957246146892, 1e-12);
    EXPECT_NEAR(z[0], -z[2], 1e-15);
}

TEST(Crystal, TotalsAndDifferences) {
    const TrapConfig cfg = three_ions();
    const auto c = equilibrium_positions(cfg);
    const auto s = total_shifts(c, cfg, 0.634, 3.4e6);
    ASSERT_EQ(s.differences.size(), 3u);
    EXPECT_NEAR(s.difference(0, 2), s.zeeman_gradient[0] - s.zeeman_gradient[2], 1e-12);
    EXPECT_NEAR(s.tensor(0), s.quadrupole[0] + 0.0047, 1e-15);
    EXPECT_NEAR(s.difference(1, 0) - s.difference(1, 2), -2.0 * s.zeeman_gradient[0], 1e-12);
}

TEST(Crystal, MagicAngleRemovesQuadrupoleShift) {
    TrapConfig cfg = three_ions();
    cfg.theta = magic_angle();
    const auto c = equilibrium_positions(cfg);
    for (double q : quadrupole_shifts(c, cfg, 0.634)) EXPECT_NEAR(q, 0.0, 1e-12);
}

TEST(Crystal, Validation) {
    TrapConfig cfg;
    cfg.n_ions = 0;
    EXPECT_THROW(equilibrium_positions(cfg), DomainError);
    cfg = three_ions();
    cfg.micromotion_offset = {0.0, 0.0};
    EXPECT_THROW(cfg.validate(), DomainError);
    IonCrystal bad;
    bad.positions = {0.0, 0.0};
    EXPECT_THROW(neighbour_field_gradients(bad), DomainError);
}
