#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "urbanplan/autodiff.hpp"
#include "urbanplan/rng.hpp"

namespace urbanplan::nn {

/// Glorot-uniform matrix: entries in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (double& x : w.data()) x = rng.uniform(-limit, limit);
  return w;
}

/// Adds `<prefix>.W` (Glorot) and `<prefix>.b` (zeros) to `params`.
inline void init_dense(ParamSet& params, const std::string& prefix, std::size_t fan_in, std::size_t fan_out,
                       Rng& rng) {
  params[prefix + ".W"] = glorot(fan_in, fan_out, rng);
  params[prefix + ".b"] = Tensor({1, fan_out});
}

enum class Activation { kNone, kRelu, kSigmoid, kSoftplus };

inline Var activate(const Var& x, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return relu(x);
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kSoftplus:
      return softplus(x);
    case Activation::kNone:
      break;
  }
  return x;
}

/// Binds a parameter on the tape, as a trainable leaf or as a constant.
inline Var bind_param(Tape& tape, const ParamSet& params, const std::string& name, bool trainable) {
  const Tensor& value = params.at(name);
  return trainable ? tape.param(name, value) : tape.constant(value);
}

/// Multilayer perceptron described by its layer widths. Layer k owns the
/// parameters `<prefix>.k.W` and `<prefix>.k.b`.
struct Mlp {
  std::string prefix;
  std::vector<std::size_t> widths;  // input width first, output width last
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kNone;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layers() const { return widths.size() - 1; }
  std::string layer_name(std::size_t k) const { return prefix + "." + std::to_string(k); }

  void init(ParamSet& params, Rng& rng) const {
    for (std::size_t k = 0; k < layers(); ++k) init_dense(params, layer_name(k), widths[k], widths[k + 1], rng);
  }

  /// Weights and biases bound on a tape, so one set of leaves can serve
  /// several forward passes.
  struct Bound {
    std::vector<Var> weights;
    std::vector<Var> biases;
  };

  Bound bind(Tape& tape, const ParamSet& params, bool trainable) const {
    Bound out;
    for (std::size_t k = 0; k < layers(); ++k) {
      out.weights.push_back(bind_param(tape, params, layer_name(k) + ".W", trainable));
      out.biases.push_back(bind_param(tape, params, layer_name(k) + ".b", trainable));
    }
    return out;
  }

  /// Forward pass on a batch (rows = samples).
  Var forward(const Bound& bound, Var x) const {
    if (x.value().cols() != input_width()) {
      throw ShapeError(prefix + ": input width " + std::to_string(x.value().cols()) + ", expected " +
                       std::to_string(input_width()));
    }
    for (std::size_t k = 0; k < layers(); ++k) {
      x = add(matmul(x, bound.weights[k]), bound.biases[k]);
      x = activate(x, k + 1 == layers() ? output : hidden);
    }
    return x;
  }

  Var forward(Tape& tape, const ParamSet& params, Var x, bool trainable) const {
    return forward(bind(tape, params, trainable), x);
  }

  /// Forward pass without a tape.
  Tensor evaluate(const ParamSet& params, const Tensor& x) const {
    Tape tape;
    return forward(tape, params, tape.constant(x), false).value();
  }
};

}  // namespace urbanplan::nn
