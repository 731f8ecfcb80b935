#include <gtest/gtest.h>

#include <cmath>

#include "urbanplan/errors.hpp"
#include "urbanplan/optim.hpp"

using namespace urbanplan;

TEST(Adam, ZeroGradientLeavesParamsButCountsStep) {
  ParamSet p{{"w", Tensor::matrix(1, 2, {1, -2})}};
  Adam adam;
  adam.step(p, GradMap{{"w", Tensor({1, 2})}});
  EXPECT_EQ(p.at("w"), Tensor::matrix(1, 2, {1, -2}));
  EXPECT_EQ(adam.step_count, 1);
}

TEST(Adam, FirstStepIsLearningRateInMagnitude) {
  ParamSet p{{"w", Tensor::matrix(1, 3, {0.5, 0.5, 0.5})}};
  Adam adam;
  adam.lr = 0.01;
  const Tensor g = Tensor::matrix(1, 3, {3.0, -0.2, 1e-3});
  adam.step(p, GradMap{{"w", g}});
  for (std::size_t i = 0; i < 3; ++i) {
    // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
    const double expected = 0.5 - 0.01 * g[i] / (std::abs(g[i]) + 1e-8);
    EXPECT_NEAR(p.at("w")[i], expected, 1e-15);
    EXPECT_NEAR(std::abs(p.at("w")[i] - 0.5), 0.01, 1e-7);
  }
}

TEST(SgdMomentum, FirstStepIsPlainGradientStep) {
  ParamSet p{{"w", Tensor::matrix(1, 2, {1, 1})}};
  SgdMomentum sgd;
  sgd.lr = 0.1;
  sgd.momentum = 0.95;
  sgd.step(p, GradMap{{"w", Tensor::matrix(1, 2, {2, -4})}});
  EXPECT_NEAR(p.at("w")[0], 0.8, 1e-15);
  EXPECT_NEAR(p.at("w")[1], 1.4, 1e-15);
}

TEST(SgdMomentum, VelocityAccumulates) {
  ParamSet p{{"w", Tensor::scalar(0.0)}};
  SgdMomentum sgd;
  sgd.lr = 1.0;
  sgd.momentum = 0.5;
  const GradMap g{{"w", Tensor::scalar(1.0)}};
  sgd.step(p, g);  // v = -1
  sgd.step(p, g);  // v = -1.5
  EXPECT_DOUBLE_EQ(p.at("w").item(), -2.5);
}

TEST(Optim, MismatchedGradientsRejected) {
  ParamSet p{{"w", Tensor::scalar(0.0)}};
  Adam adam;
  EXPECT_THROW(adam.step(p, GradMap{{"w", Tensor({1, 2})}}), ShapeError);
}

TEST(Optim, AdamMinimisesQuadratic) {
  ParamSet p{{"w", Tensor::matrix(1, 2, {3, -4})}};
  Adam adam;
  adam.lr = 0.05;
  for (int i = 0; i < 2000; ++i) {
    Tape t;
    const Var w = t.param("w", p.at("w"));
    adam.step(p, t.backward(sum(square(w))));
  }
  EXPECT_NEAR(p.at("w")[0], 0.0, 1e-2);
  EXPECT_NEAR(p.at("w")[1], 0.0, 1e-2);
}
