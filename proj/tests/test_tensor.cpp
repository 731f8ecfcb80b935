#include <gtest/gtest.h>

#include "urbanplan/errors.hpp"
#include "urbanplan/rng.hpp"
#include "urbanplan/tensor.hpp"

using namespace urbanplan;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Textbook triple loop, independent of the kernel loop orders.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST(Tensor, ConstructionValidatesLength) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  const Tensor t = Tensor::matrix(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(t(1, 0), 3.0);
  EXPECT_EQ(t.size(), 4u);
}

TEST(Tensor, IdentityTimesX) {
  Rng rng(1);
  const Tensor x = random_matrix(3, 4, rng);
  EXPECT_EQ(kernels::matmul(Tensor::identity(3), x), x);
}

TEST(Tensor, KernelsMatchNaive) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.below(6), k = 1 + rng.below(9), m = 1 + rng.below(6);
    const Tensor a = random_matrix(n, k, rng), b = random_matrix(k, m, rng);
    const Tensor ref = naive_matmul(a, b);
    const Tensor fast = kernels::matmul(a, b);
    const Tensor tn = kernels::matmul_tn(kernels::transpose(a), b);
    const Tensor nt = kernels::matmul_nt(a, kernels::transpose(b));
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(fast[i], ref[i], 1e-12);
      EXPECT_NEAR(tn[i], ref[i], 1e-12);
      EXPECT_NEAR(nt[i], ref[i], 1e-12);
    }
  }
}

TEST(Tensor, MatmulShapeMismatchThrows) {
  EXPECT_THROW(kernels::matmul(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
}

TEST(Tensor, StableScalarFunctions) {
  EXPECT_DOUBLE_EQ(kernels::sigmoid(0.0), 0.5);
  EXPECT_NEAR(kernels::sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(kernels::sigmoid(800.0), 1.0);
  EXPECT_NEAR(kernels::softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(kernels::softplus(800.0), 800.0);
  EXPECT_GE(kernels::softplus(-800.0), 0.0);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_DOUBLE_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW((void)Tensor({2, 1}).item(), ShapeError);
}
