#include <gtest/gtest.h>

#include <lutclock/rng.hpp>

using namespace lutclock;

// Known-answer vectors for Philox4x32-10 (Random123 distribution).
TEST(Philox, KnownAnswers) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
              (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            {0xffffffffu, 0xffffffffu}),
              (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u}),
              (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, EvaluatesAtCompileTime) {
    constexpr auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    static_assert(r[0] == 0x6627e8d5u);
    SUCCEED();
}

TEST(TrialRng, StreamsAreReproducibleAndDistinct) {
    TrialRng a(42, 7, 3), b(42, 7, 3), c(42, 8, 3), d(42, 7, 4);
    for (int k = 0; k < 10; ++k) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
        EXPECT_NE(x, d.next_u64());
    }
}

TEST(TrialRng, FirstWordComesFromBlockZero) {
    TrialRng r(0, 0, 0);
    EXPECT_EQ(r.next_u64(), 0x6627e8d5e169c58dull);
    EXPECT_EQ(r.next_u64(), 0xbc57ac4c9b00dbd8ull);
}

TEST(TrialRng, UniformAndNormalMoments) {
    TrialRng r(123, 0, 9);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sn / n, 0.0, 5.0 / std::sqrt(double(n)));
    EXPECT_NEAR(sn2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}
