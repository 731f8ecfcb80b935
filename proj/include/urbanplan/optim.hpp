#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "urbanplan/autodiff.hpp"

namespace urbanplan {

inline void require_matching(const ParamSet& params, const GradMap& grads) {
  for (const auto& [name, g] : grads) {
    const auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("gradient for unknown parameter " + name);
    if (it->second.shape() != g.shape()) {
      throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match parameter " + name + " " +
                       shape_str(it->second.shape()));
    }
  }
}

/// Adam with bias correction. Moment buffers are created lazily per
/// parameter and mirror its shape.
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step_count = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;

  void step(ParamSet& params, const GradMap& grads) {
    require_matching(params, grads);
    ++step_count;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (const auto& [name, g] : grads) {
      Tensor& p = params.at(name);
      auto [m_it, m_new] = first_moment.try_emplace(name, p.shape());
      auto [v_it, v_new] = second_moment.try_emplace(name, p.shape());
      Tensor& m = m_it->second;
      Tensor& v = v_it->second;
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
  }
};

/// SGD with classical momentum: v <- momentum * v - lr * g; p <- p + v.
struct SgdMomentum {
  double lr = 1e-2;
  double momentum = 0.9;
  std::int64_t step_count = 0;
  std::map<std::string, Tensor> velocity;

  void step(ParamSet& params, const GradMap& grads) {
    require_matching(params, grads);
    ++step_count;
    for (const auto& [name, g] : grads) {
      Tensor& p = params.at(name);
      Tensor& v = velocity.try_emplace(name, p.shape()).first->second;
      for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        p[i] += v[i];
      }
    }
  }
};

}  // namespace urbanplan
