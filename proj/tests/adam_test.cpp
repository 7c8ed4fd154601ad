#include <gtest/gtest.h>

#include "fsrec/adam.hpp"
#include "fsrec/init.hpp"

using fsrec::num::AdamState;
using fsrec::num::Tensor;

TEST(Adam, ZeroGradientIsFixedPoint) {
    Tensor w = fsrec::num::xavier_init({3, 3}, 1u);
    Tensor before = w;
    AdamState adam;
    std::vector<Tensor> zero = {Tensor::zeros({3, 3})};
    for (int i = 0; i < 5; ++i) adam.step({&w}, zero);
    EXPECT_TRUE(fsrec::num::bitwise_equal(w, before));
    EXPECT_EQ(adam.step_count(), 5u);
}

TEST(Adam, FirstStepHandComputed) {
    // defaults: alpha 0.001, beta1 0.9, beta2 0.999, eps 1e-8; g = 1
    Tensor w = Tensor::scalar(0.0);
    AdamState adam;
    adam.step({&w}, {Tensor::scalar(1.0)});
    double expected_delta = -0.001 * (1.0 / (1.0 + 1e-8));
    EXPECT_NEAR(w[0], expected_delta, 1e-15);
    EXPECT_NEAR(w[0], -0.000999999, 1e-9);
    // first-step moments from the recurrences
    EXPECT_NEAR(adam.slot(0).m[0], 0.1, 1e-15);
    EXPECT_NEAR(adam.slot(0).v[0], 0.001, 1e-15);
}

TEST(Adam, ShapeMismatchRejected) {
    Tensor w = Tensor::zeros({2, 2});
    AdamState adam;
    EXPECT_THROW(adam.step({&w}, {Tensor::zeros({3})}), std::invalid_argument);
}

TEST(Adam, DeterministicAcrossRuns) {
    auto run = [] {
        Tensor w = fsrec::num::xavier_init({4}, 2u);
        AdamState adam;
        for (int i = 0; i < 10; ++i) {
            Tensor g({4});
            for (std::size_t j = 0; j < 4; ++j) g[j] = 0.1 * static_cast<double>(i + 1) * (j % 2 ? -1 : 1);
            adam.step({&w}, {g});
        }
        return w;
    };
    EXPECT_TRUE(fsrec::num::bitwise_equal(run(), run()));
}

TEST(Adam, StepCounterStrictlyIncreases) {
    Tensor w = Tensor::zeros({1});
    AdamState adam;
    for (std::uint64_t i = 1; i <= 3; ++i) {
        adam.step({&w}, {Tensor::scalar(0.5)});
        EXPECT_EQ(adam.step_count(), i);
    }
}

TEST(ClipGlobalNorm, ScalesAboveLimitOnly) {
    std::vector<Tensor> grads = {Tensor::vector({3.0, 0.0}), Tensor::vector({0.0, 4.0})};
    double norm = fsrec::num::clip_global_norm(grads, 10.0);
    EXPECT_DOUBLE_EQ(norm, 5.0);
    EXPECT_DOUBLE_EQ(grads[0][0], 3.0);
    norm = fsrec::num::clip_global_norm(grads, 1.0);
    EXPECT_DOUBLE_EQ(norm, 5.0);
    EXPECT_NEAR(grads[0][0], 3.0 / 5.0, 1e-15);
    // limit 0 disables
    std::vector<Tensor> g2 = {Tensor::vector({30.0})};
    fsrec::num::clip_global_norm(g2, 0.0);
    EXPECT_DOUBLE_EQ(g2[0][0], 30.0);
}
