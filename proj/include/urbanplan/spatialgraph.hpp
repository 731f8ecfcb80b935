#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "urbanplan/errors.hpp"
#include "urbanplan/features.hpp"
#include "urbanplan/geodata.hpp"
#include "urbanplan/tensor.hpp"

namespace urbanplan {

/// Attributed graph over the 8 ring areas. `adjacency` has no self-loops;
/// `features` rows follow the ring order and columns are [V | R | O | U].
struct SpatialGraph {
  AreaId area = 0;
  Tensor adjacency;
  Tensor features;
};

/// Ring areas i and i +- 1 (mod 8) share an edge in the 3x3 layout; no
/// other pair does.
inline Tensor ring_adjacency() {
  Tensor a({kRingSize, kRingSize});
  for (std::size_t i = 0; i < kRingSize; ++i) {
    a(i, (i + 1) % kRingSize) = 1.0;
    a((i + 1) % kRingSize, i) = 1.0;
  }
  return a;
}

inline SpatialGraph build_graph(const ContextFeatures& f) {
  const std::size_t rows = f.V.rows();
  for (const Tensor* part : {&f.R, &f.O, &f.U}) {
    if (part->rows() != rows) throw ShapeError("build_graph: feature blocks have different row counts");
  }
  Tensor x({rows, f.width()});
  std::size_t offset = 0;
  for (const Tensor* part : {&f.V, &f.R, &f.O, &f.U}) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < part->cols(); ++j) x(i, offset + j) = (*part)(i, j);
    offset += part->cols();
  }
  return SpatialGraph{f.area, ring_adjacency(), std::move(x)};
}

/// Names of the node-feature columns for t months and m categories.
inline std::vector<std::string> feature_columns(int months, int categories) {
  std::vector<std::string> cols;
  for (int j = 0; j + 1 < months; ++j) cols.push_back("V.trend" + std::to_string(j));
  for (int c = 0; c < categories; ++c) cols.push_back("R.category" + std::to_string(c));
  for (const char* name : {"O.leaving", "O.arriving", "O.transition", "O.stop_density", "O.card_balance"})
    cols.emplace_back(name);
  for (const char* name : {"U.leaving", "U.arriving", "U.transition", "U.speed", "U.distance"}) cols.emplace_back(name);
  return cols;
}

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I. Without
/// self-loops the same normalisation is applied to A itself.
inline Tensor normalized_adjacency(const Tensor& a, bool self_loops = true) {
  kernels::require_matrix(a, "normalized_adjacency");
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ShapeError("normalized_adjacency: adjacency must be square, got " + shape_str(a.shape()));
  Tensor ah = a;
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) ah(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += ah(i, j);
    if (!(deg > 0.0)) throw DataError("normalized_adjacency: node " + std::to_string(i) + " is isolated");
    inv_sqrt[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ah(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return ah;
}

/// Reconstruction target matching the propagation operator: A + I when
/// self-loops are enabled, A otherwise.
inline Tensor reconstruction_target(const Tensor& a, bool self_loops = true) {
  Tensor t = a;
  if (self_loops)
    for (std::size_t i = 0; i < t.rows(); ++i) t(i, i) += 1.0;
  return t;
}

}  // namespace urbanplan
