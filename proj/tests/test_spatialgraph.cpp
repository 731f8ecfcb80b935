#include <gtest/gtest.h>

#include "urbanplan/spatialgraph.hpp"

using namespace urbanplan;

TEST(RingAdjacency, CycleOfEight) {
  const Tensor a = ring_adjacency();
  for (std::size_t i = 0; i < kRingSize; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < kRingSize; ++j) {
      EXPECT_EQ(a(i, j), a(j, i));
      deg += a(i, j);
    }
    EXPECT_EQ(a(i, i), 0.0);
    EXPECT_EQ(deg, 2.0);
  }
  EXPECT_EQ(a(0, 1), 1.0);  // NW-N
  EXPECT_EQ(a(7, 0), 1.0);  // W-NW
  EXPECT_EQ(a(0, 4), 0.0);  // NW-SE
}

// Ring with self-loops has every degree 3, so the operator is (A + I) / 3.
TEST(NormalizedAdjacency, RingWithSelfLoops) {
  const Tensor n = normalized_adjacency(ring_adjacency());
  for (std::size_t i = 0; i < kRingSize; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < kRingSize; ++j) s += n(i, j);
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(n(i, i), 1.0 / 3.0, 1e-15);
  }
}

TEST(NormalizedAdjacency, SymmetricAndScaledLikeDegrees) {
  // Path 0-1-2 without self-loops: degrees 1, 2, 1.
  const Tensor a = Tensor::matrix(3, 3, {0, 1, 0, 1, 0, 1, 0, 1, 0});
  const Tensor n = normalized_adjacency(a, false);
  EXPECT_NEAR(n(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n(1, 2), n(2, 1), 0.0);
  EXPECT_EQ(n(1, 1), 0.0);
}

TEST(NormalizedAdjacency, IsolatedNodeRejected) {
  const Tensor a = Tensor::matrix(2, 2, {0, 0, 0, 0});
  EXPECT_THROW(normalized_adjacency(a, false), DataError);
  EXPECT_NO_THROW(normalized_adjacency(a, true));
  EXPECT_THROW(normalized_adjacency(Tensor::zeros(2, 3)), ShapeError);
}

TEST(ReconstructionTarget, AddsIdentityOnlyWithSelfLoops) {
  const Tensor a = ring_adjacency();
  EXPECT_EQ(reconstruction_target(a, false), a);
  const Tensor t = reconstruction_target(a, true);
  for (std::size_t i = 0; i < kRingSize; ++i) EXPECT_EQ(t(i, i), 1.0);
}

TEST(BuildGraph, ConcatenatesBlocksInOrder) {
  ContextFeatures f{42, Tensor({8, 2}, 1.0), Tensor({8, 3}, 2.0), Tensor({8, 5}, 3.0), Tensor({8, 5}, 4.0)};
  const SpatialGraph g = build_graph(f);
  EXPECT_EQ(g.area, 42);
  ASSERT_EQ(g.features.shape(), (Shape{8, 15}));
  EXPECT_EQ(g.features(3, 1), 1.0);
  EXPECT_EQ(g.features(3, 2), 2.0);
  EXPECT_EQ(g.features(3, 5), 3.0);
  EXPECT_EQ(g.features(3, 14), 4.0);
  EXPECT_EQ(feature_columns(3, 3).size(), 15u);
  EXPECT_EQ(feature_columns(3, 3)[2], "R.category0");
}

TEST(BuildGraph, RowMismatchRejected) {
  ContextFeatures f{0, Tensor({8, 2}), Tensor({7, 3}), Tensor({8, 5}), Tensor({8, 5})};
  EXPECT_THROW(build_graph(f), ShapeError);
}
