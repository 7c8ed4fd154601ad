#include <gtest/gtest.h>

#include <cmath>

#include "fsrec/init.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

using fsrec::num::Rng;
using fsrec::num::Tensor;

TEST(Tensor, ShapeInvariants) {
    Tensor t({2, 3});
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    EXPECT_THROW(Tensor({0, 3}), std::invalid_argument);
    EXPECT_THROW(Tensor(std::vector<std::size_t>{}), std::invalid_argument);
    EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Tensor, FiniteCheck) {
    Tensor t({2});
    EXPECT_TRUE(t.all_finite());
    t[1] = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(t.all_finite());
}

TEST(Rng, DeterministicPerSeedAndOrder) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
    Rng c(43);
    EXPECT_NE(Rng(42).next_u64(), c.next_u64());
}

TEST(Rng, SplitStreamsAreIndependentOfSiblingConsumption) {
    Rng root(7);
    Rng s1 = root.split("alpha");
    double first = s1.uniform();

    Rng root2(7);
    Rng other = root2.split("beta");
    other.uniform();
    other.uniform();
    Rng s1_again = root2.split("alpha");
    EXPECT_EQ(first, s1_again.uniform());
}

TEST(Rng, UniformRangeAndMean) {
    Rng rng(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
    Rng rng(2);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Xavier, BoundsForTwoByThree) {
    // fan_in 2, fan_out 3 -> bound sqrt(6/5)
    double bound = std::sqrt(6.0 / 5.0);
    Tensor t = fsrec::num::xavier_init({2, 3}, 11u);
    for (double v : t.values()) {
        EXPECT_LE(std::abs(v), bound);
    }
}

TEST(Xavier, SampleMeanNearZero) {
    Tensor t = fsrec::num::xavier_init({100000}, 5u);
    double sum = 0.0;
    for (double v : t.values()) sum += v;
    EXPECT_NEAR(sum / static_cast<double>(t.size()), 0.0, 0.01);
}

TEST(Xavier, DeterministicPerSeed) {
    Tensor a = fsrec::num::xavier_init({4, 7}, 9u);
    Tensor b = fsrec::num::xavier_init({4, 7}, 9u);
    EXPECT_TRUE(fsrec::num::bitwise_equal(a, b));
}

TEST(Xavier, RejectsZeroDimension) {
    EXPECT_THROW(fsrec::num::xavier_init({0, 3}, 1u), std::invalid_argument);
}

TEST(Dropout, RetainOneIsIdentity) {
    Tensor t({100});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    Tensor out = fsrec::num::dropout(t, 1.0, 3u, true);
    EXPECT_TRUE(fsrec::num::bitwise_equal(t, out));
}

TEST(Dropout, InferenceIsIdentity) {
    Tensor t = fsrec::num::xavier_init({50}, 8u);
    Tensor out = fsrec::num::dropout(t, 0.5, 3u, false);
    EXPECT_TRUE(fsrec::num::bitwise_equal(t, out));
}

TEST(Dropout, KeepFractionAndExpectation) {
    const std::size_t n = 1000000;
    Tensor t = Tensor::full({n}, 1.0);
    Tensor out = fsrec::num::dropout(t, 0.8, 17u, true);
    std::size_t kept = 0;
    double sum = 0.0;
    for (double v : out.values()) {
        if (v != 0.0) {
            ++kept;
            EXPECT_NEAR(v, 1.0 / 0.8, 1e-12);
        }
        sum += v;
    }
    double frac = static_cast<double>(kept) / static_cast<double>(n);
    EXPECT_NEAR(frac, 0.8, 0.002);
    // inverted scaling keeps the entrywise expectation at the input value
    EXPECT_NEAR(sum / static_cast<double>(n), 1.0, 0.005);
}

TEST(Dropout, DeterministicMasks) {
    Tensor t = Tensor::full({1000}, 2.0);
    Tensor a = fsrec::num::dropout(t, 0.6, 21u, true);
    Tensor b = fsrec::num::dropout(t, 0.6, 21u, true);
    EXPECT_TRUE(fsrec::num::bitwise_equal(a, b));
}

TEST(Dropout, RejectsNonPositiveRetain) {
    Tensor t({4});
    EXPECT_THROW(fsrec::num::dropout(t, 0.0, 1u, true), std::invalid_argument);
    EXPECT_THROW(fsrec::num::dropout(t, -0.5, 1u, true), std::invalid_argument);
}
