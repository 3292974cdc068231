#include <set>

#include <gtest/gtest.h>

#include "tdlab/rng.hpp"

using namespace tdlab;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
    auto b = Philox::bijection({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(b, (Philox::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
    auto b = Philox::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(b, (Philox::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    auto b = Philox::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(b, (Philox::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, SameSeedSameStream) {
    Philox a(42, 3), b(42, 3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Philox, StreamsDiffer) {
    Philox a(42, 1), b(42, 2), c(43, 1);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 100; ++i) {
        auto x = a(), y = b(), z = c();
        same_ab += x == y;
        same_ac += x == z;
    }
    EXPECT_LT(same_ab, 2);
    EXPECT_LT(same_ac, 2);
}

TEST(Philox, UniformInOpenInterval) {
    Philox g(7, 0);
    double s = 0;
    for (int i = 0; i < 20000; ++i) {
        double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
    }
    EXPECT_NEAR(s / 20000, 0.5, 0.01);
}

TEST(Philox, NormalFillMoments) {
    Eigen::MatrixXd A(200, 200);
    auto g = make_rng(5, Stream::W1);
    fill_normal(A, g, 2.0);
    double mean = A.mean();
    double var = (A.array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 0.03);
    EXPECT_NEAR(var, 4.0, 0.08);
}
