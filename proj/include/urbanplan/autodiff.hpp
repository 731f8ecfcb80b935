#pragma once

// Reverse-mode differentiation over a linear tape.
//
// Nodes are appended as operations execute, so parents always precede
// children and a reverse sweep over the node vector is a reverse topological
// order. Every node is visited exactly once per backward() call.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "urbanplan/errors.hpp"
#include "urbanplan/tensor.hpp"

namespace urbanplan {

/// Named parameter tensors. std::map keeps iteration order deterministic.
using ParamSet = std::map<std::string, Tensor>;
using GradMap = std::map<std::string, Tensor>;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) { return push(std::move(value), false, {}); }

  /// Registers a trainable leaf. Its gradient is reported under `name`.
  Var param(const std::string& name, const Tensor& value) {
    if (params_.count(name)) throw std::invalid_argument("parameter registered twice: " + name);
    Var v = push(value, true, {});
    params_.emplace(name, v.id());
    return v;
  }

  /// Records an operation. `backward` is dropped when no input needs a
  /// gradient.
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
    bool needs = false;
    for (const Var& in : inputs) {
      check_owner(in);
      needs = needs || nodes_[in.id()].requires_grad;
    }
    return push(std::move(value), needs, needs ? std::move(backward) : BackwardFn{});
  }

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  /// Gradient buffer of a node during backward; adds are accumulated here.
  Tensor& grad(std::size_t id) { return nodes_[id].grad; }

  /// Accumulates `g` into the gradient of `target` if it needs one.
  void accumulate(const Var& target, const Tensor& g) {
    auto& node = nodes_[target.id()];
    if (!node.requires_grad) return;
    kernels::axpy(1.0, g, node.grad);
  }

  /// Runs the reverse sweep from a scalar loss and returns one gradient per
  /// registered parameter. Gradients are reset first, so repeated calls give
  /// identical results.
  GradMap backward(const Var& loss) {
    check_owner(loss);
    if (loss.value().size() != 1) {
      throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    }
    for (auto& node : nodes_) {
      if (node.requires_grad) node.grad = Tensor(node.value.shape());
    }
    if (nodes_[loss.id()].requires_grad) {
      nodes_[loss.id()].grad[0] = 1.0;
      for (std::size_t i = loss.id() + 1; i-- > 0;) {
        auto& node = nodes_[i];
        if (node.backward) node.backward(*this, i);
      }
    }
    GradMap grads;
    for (const auto& [name, id] : params_) {
      const auto& node = nodes_[id];
      grads.emplace(name, node.grad.size() == node.value.size() ? node.grad : Tensor(node.value.shape()));
    }
    return grads;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, std::move(backward)});
    return Var(this, nodes_.size() - 1);
  }

  void check_owner(const Var& v) const {
    if (v.tape() != this) throw std::invalid_argument("variable belongs to a different tape");
  }

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> params_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

// ---------------------------------------------------------------------------
// Primitives. Each computes its forward value and registers the local
// gradient rule.

namespace detail {

inline void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

template <class Fwd, class Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv) {
  Tape& tape = *a.tape();
  Tensor out = kernels::map(a.value(), fwd);
  return tape.record(std::move(out), {a}, [a, deriv](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& x = a.value();
    const Tensor& y = t.value(self);
    Tensor ga(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] = g[i] * deriv(x[i], y[i]);
    t.accumulate(a, ga);
  });
}

}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  Tape& tape = *a.tape();
  Tensor out = kernels::matmul(a.value(), b.value());
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(a.id())) t.accumulate(a, kernels::matmul_nt(g, b.value()));
    if (t.requires_grad(b.id())) t.accumulate(b, kernels::matmul_tn(a.value(), g));
  });
}

/// Elementwise sum. `b` may also be a 1 x cols row broadcast over the rows
/// of `a` (bias addition).
inline Var add(const Var& a, const Var& b) {
  Tape& tape = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() == bv.shape()) {
    Tensor out = av;
    kernels::axpy(1.0, bv, out);
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
      const Tensor g = t.grad(self);
      t.accumulate(a, g);
      t.accumulate(b, g);
    });
  }
  if (av.rank() == 2 && bv.rank() == 2 && bv.rows() == 1 && bv.cols() == av.cols()) {
    Tensor out = av;
    const std::size_t cols = av.cols();
    for (std::size_t i = 0; i < av.rows(); ++i)
      for (std::size_t j = 0; j < cols; ++j) out(i, j) += bv[j];
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
      const Tensor g = t.grad(self);
      t.accumulate(a, g);
      if (t.requires_grad(b.id())) {
        Tensor gb(b.shape());
        const std::size_t cols = g.cols();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < cols; ++j) gb[j] += g(i, j);
        t.accumulate(b, gb);
      }
    });
  }
  throw ShapeError("add: incompatible shapes " + shape_str(av.shape()) + " + " + shape_str(bv.shape()));
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_shape("sub", a, b);
  Tape& tape = *a.tape();
  Tensor out = a.value();
  kernels::axpy(-1.0, b.value(), out);
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor g = t.grad(self);
    t.accumulate(a, g);
    if (t.requires_grad(b.id())) t.accumulate(b, kernels::map(g, [](double v) { return -v; }));
  });
}

/// Elementwise (Hadamard) product.
inline Var multiply(const Var& a, const Var& b) {
  detail::require_same_shape("multiply", a, b);
  Tape& tape = *a.tape();
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor ga(a.shape()), gb(b.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] = g[i] * b.value()[i];
      gb[i] = g[i] * a.value()[i];
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

inline Var scale(const Var& a, double factor) {
  return detail::unary(a, [factor](double x) { return factor * x; },
                       [factor](double, double) { return factor; });
}

inline Var add_scalar(const Var& a, double offset) {
  return detail::unary(a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

/// Horizontal concatenation of matrices with equal row counts.
inline Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape& tape = *parts.front().tape();
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    kernels::require_matrix(p.value(), "concat");
    if (p.value().rows() != rows) {
      throw ShapeError("concat: row counts differ, " + shape_str(parts.front().shape()) + " vs " +
                       shape_str(p.shape()));
    }
    cols += p.value().cols();
  }
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, offset + j) = v(i, j);
    offset += v.cols();
  }
  return tape.record(std::move(out), parts, [parts](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t offset = 0;
    for (const Var& p : parts) {
      const std::size_t pc = p.value().cols();
      if (t.requires_grad(p.id())) {
        Tensor gp(p.shape());
        for (std::size_t i = 0; i < gp.rows(); ++i)
          for (std::size_t j = 0; j < pc; ++j) gp(i, j) = g(i, offset + j);
        t.accumulate(p, gp);
      }
      offset += pc;
    }
  });
}

inline Var reshape(const Var& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  Tape& tape = *a.tape();
  return tape.record(a.value().reshaped(std::move(shape)), {a}, [a](Tape& t, std::size_t self) {
    t.accumulate(a, t.grad(self).reshaped(a.shape()));
  });
}

inline Var transpose(const Var& a) {
  Tape& tape = *a.tape();
  return tape.record(kernels::transpose(a.value()), {a}, [a](Tape& t, std::size_t self) {
    t.accumulate(a, kernels::transpose(t.grad(self)));
  });
}

inline Var sum(const Var& a) {
  Tape& tape = *a.tape();
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return tape.record(Tensor::scalar(s), {a}, [a](Tape& t, std::size_t self) {
    t.accumulate(a, Tensor(a.shape(), t.grad(self)[0]));
  });
}

inline Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

/// Mean over rows: (r x c) -> (1 x c).
inline Var mean_rows(const Var& a) {
  Tape& tape = *a.tape();
  const Tensor& v = a.value();
  kernels::require_matrix(v, "mean_rows");
  const double inv = 1.0 / static_cast<double>(v.rows());
  Tensor out({1, v.cols()});
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) out[j] += v(i, j) * inv;
  return tape.record(std::move(out), {a}, [a, inv](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor ga(a.shape());
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) = g[j] * inv;
    t.accumulate(a, ga);
  });
}

/// NaN passes through so divergence stays visible downstream.
inline Var relu(const Var& a) {
  return detail::unary(a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
                       [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Var sigmoid(const Var& a) {
  return detail::unary(a, [](double x) { return kernels::sigmoid(x); },
                       [](double, double y) { return y * (1.0 - y); });
}

inline Var softplus(const Var& a) {
  return detail::unary(a, [](double x) { return kernels::softplus(x); },
                       [](double x, double) { return kernels::sigmoid(x); });
}

inline Var log(const Var& a) {
  return detail::unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Var exp(const Var& a) {
  return detail::unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Var square(const Var& a) {
  return detail::unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

/// Clamp into [lo, hi]; the gradient is zero where the clamp is active.
inline Var clamp(const Var& a, double lo, double hi) {
  return detail::unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
                       [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------

/// Builds a scalar loss on a fresh tape from the given parameters.
using LossBuilder = std::function<Var(Tape&, const ParamSet&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

/// Compares analytic gradients with central finite differences at step
/// `eps`. Relative error is |analytic - numeric| / max(1, |numeric|).
inline GradCheckResult grad_check(const LossBuilder& build, ParamSet params, double eps = 1e-5) {
  GradMap analytic;
  {
    Tape tape;
    analytic = tape.backward(build(tape, params));
  }
  auto eval = [&](const ParamSet& p) {
    Tape tape;
    return build(tape, p).value().item();
  };
  GradCheckResult result;
  for (auto& [name, tensor] : params) {
    const auto it = analytic.find(name);
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + eps;
      const double up = eval(params);
      tensor[i] = saved - eps;
      const double down = eval(params);
      tensor[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = it == analytic.end() ? 0.0 : it->second[i];
      const double err = std::abs(exact - numeric) / std::max(1.0, std::abs(numeric));
      if (err > result.max_rel_error || !std::isfinite(err)) {
        result.max_rel_error = std::isfinite(err) ? err : INFINITY;
        result.worst_param = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace urbanplan
