#pragma once

// Variational graph autoencoder over spatial attributed graphs.
//
//   hidden  = relu(Â X W1)
//   mu      = Â hidden Wmu
//   logvar  = Â hidden Wlogvar          (log of the variance)
//   z       = mu + exp(logvar / 2) * eps,   eps ~ N(0, 1)
//   recon   = sigmoid(z z^T)
//   loss    = KL(q(z) || N(0, 1)) + sum_ij (target_ij - recon_ij)^2
//
// Â is the symmetrically normalised adjacency. The KL term is the closed
// form for diagonal Gaussians summed over nodes and latent dimensions.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "urbanplan/autodiff.hpp"
#include "urbanplan/errors.hpp"
#include "urbanplan/nn.hpp"
#include "urbanplan/optim.hpp"
#include "urbanplan/rng.hpp"
#include "urbanplan/spatialgraph.hpp"

namespace urbanplan {

enum class Pooling { kMean, kFlatten };

struct VgaeConfig {
  std::size_t hidden = 32;   // M
  std::size_t latent = 100;  // H
  double lr = 0.005;
  int epochs = 300;
  bool self_loops = true;
  double kl_weight = 1.0;  // 1 reproduces the plain KL + reconstruction sum
  Pooling pooling = Pooling::kMean;
  std::uint64_t seed = 0;
};

/// Per-column z-score statistics fitted on the training graphs.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const std::vector<SpatialGraph>& graphs) {
    if (graphs.empty()) throw DataError("standardizer: no graphs");
    const std::size_t cols = graphs.front().features.cols();
    Standardizer s{std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0)};
    double rows = 0.0;
    for (const auto& g : graphs) {
      if (g.features.cols() != cols) throw ShapeError("standardizer: graphs have different feature widths");
      for (std::size_t i = 0; i < g.features.rows(); ++i)
        for (std::size_t j = 0; j < cols; ++j) s.mean[j] += g.features(i, j);
      rows += static_cast<double>(g.features.rows());
    }
    for (double& m : s.mean) m /= rows;
    for (const auto& g : graphs)
      for (std::size_t i = 0; i < g.features.rows(); ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          const double d = g.features(i, j) - s.mean[j];
          s.stddev[j] += d * d;
        }
    for (double& sd : s.stddev) {
      sd = std::sqrt(sd / rows);
      if (!(sd > 1e-12)) sd = 1.0;  // constant column
    }
    return s;
  }

  Tensor apply(const Tensor& x) const {
    if (x.cols() != mean.size()) {
      throw ShapeError("standardizer: expected " + std::to_string(mean.size()) + " columns, got " +
                       std::to_string(x.cols()));
    }
    Tensor out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / stddev[j];
    return out;
  }
};

inline constexpr const char* kVgaeW1 = "gcn1.W";
inline constexpr const char* kVgaeWmu = "gcn2_mu.W";
inline constexpr const char* kVgaeWlogvar = "gcn2_logvar.W";

inline ParamSet init_vgae(std::size_t in_width, const VgaeConfig& cfg, Rng& rng) {
  ParamSet p;
  p[kVgaeW1] = nn::glorot(in_width, cfg.hidden, rng);
  p[kVgaeWmu] = nn::glorot(cfg.hidden, cfg.latent, rng);
  p[kVgaeWlogvar] = nn::glorot(cfg.hidden, cfg.latent, rng);
  return p;
}

struct NodeLatents {
  Var mu;
  Var logvar;
  Var z;
};

struct VgaeWeights {
  Var w1, wmu, wlogvar;
};

inline VgaeWeights bind_vgae(Tape& tape, const ParamSet& params, bool trainable) {
  return {nn::bind_param(tape, params, kVgaeW1, trainable), nn::bind_param(tape, params, kVgaeWmu, trainable),
          nn::bind_param(tape, params, kVgaeWlogvar, trainable)};
}

/// Encoder. With `noise == nullptr` the sample collapses to z = mu.
inline NodeLatents encode(Tape& tape, const VgaeWeights& w, const Tensor& norm_adj, const Tensor& x, Rng* noise) {
  const Var a = tape.constant(norm_adj);
  const Var hidden = relu(matmul(matmul(a, tape.constant(x)), w.w1));
  const Var ah = matmul(a, hidden);
  const Var mu = matmul(ah, w.wmu);
  const Var logvar = matmul(ah, w.wlogvar);
  if (!noise) return {mu, logvar, mu};
  Tensor eps(mu.shape());
  for (double& e : eps.data()) e = noise->normal();
  const Var z = add(mu, multiply(exp(scale(logvar, 0.5)), tape.constant(std::move(eps))));
  return {mu, logvar, z};
}

inline NodeLatents encode(Tape& tape, const ParamSet& params, const Tensor& norm_adj, const Tensor& x, Rng* noise,
                          bool trainable = true) {
  return encode(tape, bind_vgae(tape, params, trainable), norm_adj, x, noise);
}

inline Var decode(const Var& z) { return sigmoid(matmul(z, transpose(z))); }

/// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1)
inline Var gaussian_kl(const Var& mu, const Var& logvar) {
  const Var inner = sub(add(square(mu), exp(logvar)), logvar);
  return scale(sum(add_scalar(inner, -1.0)), 0.5);
}

inline Var reconstruction_error(const Var& recon, const Tensor& target) {
  return sum(square(sub(recon, recon.tape()->constant(target))));
}

struct VgaeLoss {
  Var total;
  Var kl;
  Var recon;
};

inline VgaeLoss vgae_loss(const NodeLatents& latents, const Var& recon, const Tensor& target,
                          double kl_weight = 1.0) {
  const Var kl = gaussian_kl(latents.mu, latents.logvar);
  const Var rec = reconstruction_error(recon, target);
  return {add(kl_weight == 1.0 ? kl : scale(kl, kl_weight), rec), kl, rec};
}

struct VgaeModel {
  VgaeConfig config;
  ParamSet params;
  Standardizer standardizer;
  std::vector<double> loss_history;   // mean total loss per epoch
  std::vector<double> recon_history;  // mean reconstruction term per epoch
};

/// Full-batch training: one Adam step per epoch on the mean loss over all
/// graphs.
inline VgaeModel train_vgae(const std::vector<SpatialGraph>& graphs, const VgaeConfig& cfg) {
  if (graphs.empty()) throw DataError("train_vgae: need at least one graph");
  if (cfg.epochs < 1) throw ConfigError("train_vgae: epochs must be >= 1");
  VgaeModel model;
  model.config = cfg;
  model.standardizer = Standardizer::fit(graphs);
  Rng init_rng = Rng::stream(cfg.seed, 101);
  Rng noise_rng = Rng::stream(cfg.seed, 102);
  model.params = init_vgae(graphs.front().features.cols(), cfg, init_rng);

  std::vector<Tensor> xs, adjs, targets;
  for (const auto& g : graphs) {
    xs.push_back(model.standardizer.apply(g.features));
    adjs.push_back(normalized_adjacency(g.adjacency, cfg.self_loops));
    targets.push_back(reconstruction_target(g.adjacency, cfg.self_loops));
  }

  Adam adam;
  adam.lr = cfg.lr;
  const double inv = 1.0 / static_cast<double>(graphs.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Tape tape;
    const VgaeWeights w = bind_vgae(tape, model.params, true);
    Var total;
    double recon_sum = 0.0;
    for (std::size_t g = 0; g < graphs.size(); ++g) {
      const NodeLatents latents = encode(tape, w, adjs[g], xs[g], &noise_rng);
      const VgaeLoss loss = vgae_loss(latents, decode(latents.z), targets[g], cfg.kl_weight);
      recon_sum += loss.recon.value().item();
      total = g == 0 ? loss.total : add(total, loss.total);
    }
    const Var objective = scale(total, inv);
    const double value = objective.value().item();
    if (!std::isfinite(value)) throw DivergenceError("VGAE loss is not finite", epoch);
    model.loss_history.push_back(value);
    model.recon_history.push_back(recon_sum * inv);
    adam.step(model.params, tape.backward(objective));
  }
  return model;
}

/// Eval-mode latent means (8 x H) of one graph.
inline Tensor latent_means(const VgaeModel& model, const SpatialGraph& graph) {
  Tape tape;
  const auto latents = encode(tape, model.params, normalized_adjacency(graph.adjacency, model.config.self_loops),
                              model.standardizer.apply(graph.features), nullptr, false);
  return latents.mu.value();
}

/// Context embedding: row mean of the latent means (length H), or the
/// flattened 8 x H matrix when configured.
inline std::vector<double> embed(const VgaeModel& model, const SpatialGraph& graph) {
  const Tensor mu = latent_means(model, graph);
  if (model.config.pooling == Pooling::kFlatten) return mu.values();
  std::vector<double> out(mu.cols(), 0.0);
  for (std::size_t i = 0; i < mu.rows(); ++i)
    for (std::size_t j = 0; j < mu.cols(); ++j) out[j] += mu(i, j);
  for (double& v : out) v /= static_cast<double>(mu.rows());
  return out;
}

}  // namespace urbanplan
