#include <gtest/gtest.h>

#include "cvrd/activation.hpp"
#include "cvrd/adam.hpp"
#include "cvrd/loss.hpp"
#include "testutil.hpp"

using namespace cvrd;
using namespace cvrd::nn;

TEST(CRelu, QuadrantBehavior) {
    CTensor x(1, 1, 1, 3);
    x.re.v = {3.0, -3.0, -1.0};
    x.im.v = {4.0, 4.0, -2.0};
    const CTensor y = crelu(x);
    EXPECT_EQ(y.re.v[0], 3.0);
    EXPECT_EQ(y.im.v[0], 4.0);
    EXPECT_EQ(y.re.v[1], 0.0);
    EXPECT_EQ(y.im.v[1], 4.0);
    EXPECT_EQ(y.re.v[2], 0.0);
    EXPECT_EQ(y.im.v[2], 0.0);
}

TEST(CRelu, IdempotentBitwise) {
    CTensor x(2, 3, 5, 5);
    Rng rng(41);
    testutil::fill_uniform(x, rng, -2.0, 2.0);
    const CTensor once = crelu(x);
    const CTensor twice = crelu(once);
    EXPECT_EQ(once.re.v, twice.re.v);
    EXPECT_EQ(once.im.v, twice.im.v);
}

TEST(CRelu, BackwardMasksComponentsIndependently) {
    CTensor x(1, 1, 1, 2);
    x.re.v = {-1.0, 2.0};
    x.im.v = {3.0, -4.0};
    CTensor g(1, 1, 1, 2);
    g.re.v = {5.0, 6.0};
    g.im.v = {7.0, 8.0};
    const CTensor gi = crelu_backward(g, x);
    EXPECT_EQ(gi.re.v[0], 0.0);
    EXPECT_EQ(gi.im.v[0], 7.0);
    EXPECT_EQ(gi.re.v[1], 6.0);
    EXPECT_EQ(gi.im.v[1], 0.0);
}

TEST(SplitMse, ZeroForEqualInputs) {
    CTensor a(1, 2, 3, 3);
    Rng rng(43);
    testutil::fill_uniform(a, rng);
    EXPECT_EQ(split_mse_loss(a, a, nullptr), 0.0);
}

TEST(SplitMse, UnitOffsetGivesUnitLoss) {
    CTensor target(2, 1, 4, 4);
    Rng rng(47);
    testutil::fill_uniform(target, rng);
    CTensor pred = target;
    for (double& v : pred.re.v) v += 1.0;
    for (double& v : pred.im.v) v += 1.0;
    EXPECT_NEAR(split_mse_loss(pred, target, nullptr), 1.0, 1e-12);
}

TEST(SplitMse, QuadraticHomogeneityAndGradient) {
    CTensor target(1, 1, 2, 2);
    CTensor pred(1, 1, 2, 2);
    Rng rng(53);
    testutil::fill_uniform(target, rng);
    testutil::fill_uniform(pred, rng);
    const double l1 = split_mse_loss(pred, target, nullptr);
    CTensor pred2 = target;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred2.re.v[i] = target.re.v[i] + 2.0 * (pred.re.v[i] - target.re.v[i]);
        pred2.im.v[i] = target.im.v[i] + 2.0 * (pred.im.v[i] - target.im.v[i]);
    }
    EXPECT_NEAR(split_mse_loss(pred2, target, nullptr), 4.0 * l1, 1e-12);

    CTensor grad;
    split_mse_loss(pred, target, &grad);
    const double count = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        EXPECT_NEAR(grad.re.v[i], (pred.re.v[i] - target.re.v[i]) / count, 1e-15);
        EXPECT_NEAR(grad.im.v[i], (pred.im.v[i] - target.im.v[i]) / count, 1e-15);
    }
}

TEST(SplitMse, ShapeMismatchThrows) {
    CTensor a(1, 1, 2, 2), b(1, 1, 3, 3);
    EXPECT_THROW(split_mse_loss(a, b, nullptr), config_error);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    std::vector<double> params = {1.0, -2.0, 3.0};
    const std::vector<double> grads(3, 0.0);
    AdamState st(3);
    adam_step(params, grads, st);
    EXPECT_EQ(params, (std::vector<double>{1.0, -2.0, 3.0}));
}

TEST(Adam, FirstStepMatchesClosedForm) {
    std::vector<double> params = {0.0};
    const std::vector<double> grads = {1.0};
    AdamState st(1, /*lr=*/5e-3);
    adam_step(params, grads, st);
    // at t=1 with g=1: mhat=1, vhat=1 -> update = -lr / (1 + eps)
    EXPECT_NEAR(params[0], -st.lr / (1.0 + st.eps), 1e-15);
}

TEST(Adam, DeterministicAcrossIdenticalRuns) {
    std::vector<double> p1 = {0.5, -0.5}, p2 = p1;
    AdamState s1(2), s2(2);
    Rng rng(59);
    for (int step = 0; step < 50; ++step) {
        const std::vector<double> g = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        adam_step(p1, g, s1);
        adam_step(p2, g, s2);
    }
    EXPECT_EQ(p1, p2);
}

TEST(Adam, NonFiniteGradientThrows) {
    std::vector<double> params = {0.0};
    const std::vector<double> grads = {std::numeric_limits<double>::quiet_NaN()};
    AdamState st(1);
    EXPECT_THROW(adam_step(params, grads, st), numeric_error);
}

TEST(Adam, ConvergesOnQuadratic) {
    std::vector<double> params = {0.0};
    AdamState st(1, 0.1);
    for (int step = 0; step < 1000; ++step) {
        const std::vector<double> g = {2.0 * (params[0] - 3.0)};
        adam_step(params, g, st);
    }
    EXPECT_NEAR(params[0], 3.0, 1e-4);
}
