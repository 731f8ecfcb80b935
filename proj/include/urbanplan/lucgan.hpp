#pragma once

// Adversarial land-use planners.
//
// LUCGAN: the generator maps a context embedding z to an n x n x m
// configuration. Each iteration runs `kappa` discriminator ascent steps on
//     mean[ log D(E) + log(1 - D(F)) + log(1 - D(T)) ]
// with E well-planned, F = G(z) generated and T poorly-planned samples,
// followed by one generator descent step on mean[ log(1 - D(G(z))) ].
//
// LUCGAN+: z first passes through conditioning augmentation
//     mu_s    = relu(W_mu z + b_mu)
//     delta_s = relu(W_delta z + b_delta)
//     eta     = concat(mu_s + delta_s * eps_s, eps_c)
// and the generator loss adds KL(N(mu_s, delta_s^2) || N(0, 1)), averaged
// over the batch. Fresh eps_s, eps_c are drawn at every use.
//
// Discriminator: SGD with momentum. Generator (and augmentation): Adam.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urbanplan/autodiff.hpp"
#include "urbanplan/configplan.hpp"
#include "urbanplan/errors.hpp"
#include "urbanplan/nn.hpp"
#include "urbanplan/optim.hpp"
#include "urbanplan/rng.hpp"

namespace urbanplan {

enum class GanModel { kLucgan, kLucganPlus };

inline const char* model_name(GanModel m) { return m == GanModel::kLucgan ? "lucgan" : "lucgan-plus"; }

inline GanModel parse_model(const std::string& name) {
  if (name == "lucgan") return GanModel::kLucgan;
  if (name == "lucgan-plus") return GanModel::kLucganPlus;
  throw ConfigError("unknown model '" + name + "' (expected lucgan or lucgan-plus)");
}

inline constexpr double kProbClamp = 1e-7;
inline constexpr double kVarianceFloor = 1e-6;

struct TrainConfig {
  GanModel model = GanModel::kLucgan;
  int kappa = 1;
  std::size_t batch = 16;
  int epochs = 50;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double momentum_d = 0.95;
  std::size_t noise_dim = 50;  // eps_c length (LUCGAN+)
  std::size_t ca_dim = 100;    // mu_s / delta_s length (LUCGAN+)
  std::size_t hidden = 256;    // width of both hidden layers in G and D
  std::uint64_t seed = 0;

  void validate() const {
    std::string problems;
    if (kappa < 1) problems += " kappa must be >= 1;";
    if (batch < 1) problems += " batch must be >= 1;";
    if (epochs < 0) problems += " epochs must be >= 0;";
    if (!(lr_g > 0.0)) problems += " lr_g must be > 0;";
    if (!(lr_d > 0.0)) problems += " lr_d must be > 0;";
    if (!(momentum_d >= 0.0 && momentum_d < 1.0)) problems += " momentum_d must be in [0, 1);";
    if (hidden < 1) problems += " hidden must be >= 1;";
    if (model == GanModel::kLucganPlus && ca_dim < 1) problems += " ca_dim must be >= 1;";
    if (!problems.empty()) throw ConfigError("invalid training configuration:" + problems);
  }
};

struct EpochLog {
  int epoch = 0;
  double disc_loss = 0.0;  // mean discriminator objective (the maximised quantity)
  double gen_loss = 0.0;   // mean generator loss, KL term included
  double kl_term = 0.0;    // mean KL term (0 for LUCGAN)
};

struct GanCheckpoint {
  TrainConfig config;
  int n = 0;
  int m = 0;
  std::size_t embed_dim = 0;
  ParamSet generator;
  ParamSet discriminator;
  std::optional<ParamSet> ca;
  int epoch = 0;
  std::vector<EpochLog> history;

  std::size_t output_width() const { return static_cast<std::size_t>(n) * n * m; }
  std::size_t generator_input_width() const {
    return config.model == GanModel::kLucgan ? embed_dim : config.ca_dim + config.noise_dim;
  }
};

// ---------------------------------------------------------------------------
// Networks

inline nn::Mlp generator_net(const GanCheckpoint& c) {
  return {"G", {c.generator_input_width(), c.config.hidden, c.config.hidden, c.output_width()},
          nn::Activation::kRelu, nn::Activation::kSoftplus};
}

inline nn::Mlp discriminator_net(const GanCheckpoint& c) {
  return {"D", {c.output_width(), c.config.hidden, c.config.hidden, 1}, nn::Activation::kRelu,
          nn::Activation::kSigmoid};
}

inline nn::Mlp ca_mu_net(const GanCheckpoint& c) {
  return {"CA.mu", {c.embed_dim, c.config.ca_dim}, nn::Activation::kRelu, nn::Activation::kRelu};
}

inline nn::Mlp ca_delta_net(const GanCheckpoint& c) {
  return {"CA.delta", {c.embed_dim, c.config.ca_dim}, nn::Activation::kRelu, nn::Activation::kRelu};
}

/// Freshly initialised (untrained) networks. The discriminator can be left
/// out when only generation is needed; at large n it dominates memory.
inline GanCheckpoint init_checkpoint(const TrainConfig& cfg, int n, int m, std::size_t embed_dim,
                                     bool with_discriminator = true) {
  cfg.validate();
  if (n < 1 || m < 1) throw ConfigError("configuration shape must be positive");
  if (embed_dim < 1) throw ConfigError("embedding dimension must be >= 1");
  GanCheckpoint c;
  c.config = cfg;
  c.n = n;
  c.m = m;
  c.embed_dim = embed_dim;
  Rng rng = Rng::stream(cfg.seed, 203);
  generator_net(c).init(c.generator, rng);
  if (cfg.model == GanModel::kLucganPlus) {
    c.ca = ParamSet{};
    ca_mu_net(c).init(*c.ca, rng);
    ca_delta_net(c).init(*c.ca, rng);
  }
  if (with_discriminator) discriminator_net(c).init(c.discriminator, rng);
  return c;
}

// ---------------------------------------------------------------------------
// Building blocks on a tape

struct Augmented {
  Var eta;
  Var mu_s;
  Var delta_s;
};

/// Conditioning augmentation for a batch of embeddings (rows).
inline Augmented condition_augment(Tape& tape, const GanCheckpoint& c, const ParamSet& ca, const Var& z, Rng& noise,
                                   bool trainable) {
  const Var mu_s = ca_mu_net(c).forward(tape, ca, z, trainable);
  const Var delta_s = ca_delta_net(c).forward(tape, ca, z, trainable);
  Tensor eps_s(mu_s.shape());
  for (double& e : eps_s.data()) e = noise.normal();
  Tensor eps_c({mu_s.value().rows(), c.config.noise_dim});
  for (double& e : eps_c.data()) e = noise.normal();
  const Var sample = add(mu_s, multiply(delta_s, tape.constant(std::move(eps_s))));
  const Var eta = c.config.noise_dim == 0 ? sample : concat({sample, tape.constant(std::move(eps_c))});
  return {eta, mu_s, delta_s};
}

/// Batch-averaged KL(N(mu, delta^2) || N(0, 1)) with a variance floor:
/// 0.5 * sum(mu^2 + delta^2 - log(delta^2 + floor) - 1) / rows.
inline Var ca_kl(const Var& mu_s, const Var& delta_s) {
  const double rows = static_cast<double>(mu_s.value().rows());
  const Var var = square(delta_s);
  const Var inner = sub(add(square(mu_s), var), log(add_scalar(var, kVarianceFloor)));
  return scale(sum(add_scalar(inner, -1.0)), 0.5 / rows);
}

/// Discriminator probability, clamped away from 0 and 1.
inline Var disc_prob(const GanCheckpoint& c, const nn::Mlp::Bound& d, const Var& x) {
  return clamp(discriminator_net(c).forward(d, x), kProbClamp, 1.0 - kProbClamp);
}

/// mean over the batch of log D(E) + log(1 - D(F)) + log(1 - D(T)).
inline Var disc_objective(Tape& tape, const GanCheckpoint& c, const ParamSet& d, const Var& well, const Var& generated,
                          const Var& poor, bool trainable) {
  const std::size_t b = well.value().rows();
  if (generated.value().rows() != b || poor.value().rows() != b) {
    throw ShapeError("disc_objective: batches must have equal size");
  }
  const auto bound = discriminator_net(c).bind(tape, d, trainable);
  const Var real = sum(log(disc_prob(c, bound, well)));
  const Var fake = sum(log(add_scalar(scale(disc_prob(c, bound, generated), -1.0), 1.0)));
  const Var bad = sum(log(add_scalar(scale(disc_prob(c, bound, poor), -1.0), 1.0)));
  return scale(add(add(real, fake), bad), 1.0 / static_cast<double>(b));
}

/// mean over the batch of log(1 - D(F)).
inline Var adversarial_loss(Tape& tape, const GanCheckpoint& c, const ParamSet& d, const Var& generated) {
  const Var p = disc_prob(c, discriminator_net(c).bind(tape, d, false), generated);
  return mean(log(add_scalar(scale(p, -1.0), 1.0)));
}

/// Generator input for a batch of embeddings: z itself for LUCGAN, the
/// augmented eta for LUCGAN+.
struct GeneratorInput {
  Var input;
  std::optional<Augmented> augmented;
};

inline GeneratorInput generator_input(Tape& tape, const GanCheckpoint& c, const ParamSet& ca, const Var& z, Rng& noise,
                                      bool trainable) {
  if (c.config.model == GanModel::kLucgan) return {z, std::nullopt};
  Augmented a = condition_augment(tape, c, ca, z, noise, trainable);
  return {a.eta, a};
}

// ---------------------------------------------------------------------------
// Inference

/// Maps one generator input vector to a configuration.
inline LandUseConfig generate(const GanCheckpoint& c, const std::vector<double>& input) {
  if (input.size() != c.generator_input_width()) {
    throw ShapeError("generate: input width " + std::to_string(input.size()) + ", generator expects " +
                     std::to_string(c.generator_input_width()));
  }
  const Tensor out = generator_net(c).evaluate(c.generator, Tensor::row(input));
  return LandUseConfig(c.n, c.m, out.values());
}

/// Configuration for a context embedding. LUCGAN+ draws its augmentation
/// noise from `noise`.
inline LandUseConfig generate_for_embedding(const GanCheckpoint& c, const std::vector<double>& embedding, Rng& noise) {
  if (embedding.size() != c.embed_dim) {
    throw ShapeError("generate: embedding width " + std::to_string(embedding.size()) + ", expected " +
                     std::to_string(c.embed_dim));
  }
  if (c.config.model == GanModel::kLucgan) return generate(c, embedding);
  Tape tape;
  const auto a = condition_augment(tape, c, *c.ca, tape.constant(Tensor::row(embedding)), noise, false);
  return generate(c, a.eta.value().values());
}

// ---------------------------------------------------------------------------
// Training

/// Generator steps per epoch: ceil(max(|well|, |poor|) / batch).
inline std::size_t iterations_per_epoch(std::size_t well, std::size_t poor, std::size_t batch) {
  return (std::max(well, poor) + batch - 1) / batch;
}

namespace detail {

inline Tensor sample_rows(const std::vector<const std::vector<double>*>& pool, std::size_t count, std::size_t width,
                          Rng& rng) {
  Tensor t({count, width});
  for (std::size_t r = 0; r < count; ++r) {
    const auto& row = *pool[rng.below(pool.size())];
    std::copy(row.begin(), row.end(), t.data().begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  return t;
}

inline ParamSet merge(const ParamSet& a, const std::optional<ParamSet>& b) {
  ParamSet out = a;
  if (b) out.insert(b->begin(), b->end());
  return out;
}

inline void split(const ParamSet& merged, ParamSet& a, std::optional<ParamSet>& b) {
  for (auto& [name, t] : a) t = merged.at(name);
  if (b)
    for (auto& [name, t] : *b) t = merged.at(name);
}

}  // namespace detail

struct TrainingData {
  std::vector<std::vector<double>> well;        // flattened configurations
  std::vector<std::vector<double>> poor;        // flattened configurations
  std::vector<std::vector<double>> embeddings;  // context embeddings fed to the generator
};

inline TrainingData make_training_data(const Labeling& labels, const std::map<AreaId, std::vector<double>>& embeddings) {
  TrainingData data;
  auto add_pool = [&](const std::map<AreaId, LandUseConfig>& pool, std::vector<std::vector<double>>& out) {
    for (const auto& [id, cfg] : pool) {
      const auto it = embeddings.find(id);
      if (it == embeddings.end()) throw DataError("no context embedding for area " + std::to_string(id));
      out.push_back(cfg.counts);
      data.embeddings.push_back(it->second);
    }
  };
  add_pool(labels.well, data.well);
  add_pool(labels.poor, data.poor);
  return data;
}

/// Mean discriminator accuracy on well-planned (target 1) against generated
/// (target 0) samples, threshold 0.5.
inline double disc_accuracy(const GanCheckpoint& c, const std::vector<std::vector<double>>& well,
                            const std::vector<std::vector<double>>& generated) {
  const auto net = discriminator_net(c);
  std::size_t correct = 0;
  for (const auto& x : well) correct += net.evaluate(c.discriminator, Tensor::row(x)).item() > 0.5 ? 1 : 0;
  for (const auto& x : generated) correct += net.evaluate(c.discriminator, Tensor::row(x)).item() <= 0.5 ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(well.size() + generated.size());
}

/// Continues training `c` for `epochs` more epochs. `on_epoch` (optional)
/// sees the checkpoint after each epoch.
template <class Callback>
void train_epochs(GanCheckpoint& c, const TrainingData& data, int epochs, Callback&& on_epoch) {
  const TrainConfig& cfg = c.config;
  if (data.well.empty() || data.poor.empty()) throw DataError("training needs non-empty well and poor pools");
  if (data.embeddings.empty()) throw DataError("training needs context embeddings");
  const std::size_t width = c.output_width();
  for (const auto* pool : {&data.well, &data.poor})
    for (const auto& row : *pool)
      if (row.size() != width) throw ShapeError("training configuration has the wrong size");
  for (const auto& e : data.embeddings)
    if (e.size() != c.embed_dim) throw ShapeError("training embedding has the wrong size");

  std::vector<const std::vector<double>*> well, poor, ctx;
  for (const auto& r : data.well) well.push_back(&r);
  for (const auto& r : data.poor) poor.push_back(&r);
  for (const auto& r : data.embeddings) ctx.push_back(&r);

  SgdMomentum d_opt;
  d_opt.lr = cfg.lr_d;
  d_opt.momentum = cfg.momentum_d;
  Adam g_opt;
  g_opt.lr = cfg.lr_g;
  const std::size_t iters = iterations_per_epoch(well.size(), poor.size(), cfg.batch);
  const std::size_t b = cfg.batch;
  const bool plus = cfg.model == GanModel::kLucganPlus;
  static const ParamSet kNoParams;

  for (int e = 0; e < epochs; ++e) {
    const int epoch = c.epoch + 1;
    // Sampling and noise streams are keyed by the epoch number.
    Rng sampler = Rng::stream(cfg.seed, 1000 + 2 * static_cast<std::uint64_t>(epoch));
    Rng noise = Rng::stream(cfg.seed, 1001 + 2 * static_cast<std::uint64_t>(epoch));
    EpochLog log{epoch, 0.0, 0.0, 0.0};
    for (std::size_t it = 0; it < iters; ++it) {
      for (int k = 0; k < cfg.kappa; ++k) {
        Tape tape;
        const Var real = tape.constant(detail::sample_rows(well, b, width, sampler));
        const Var z = tape.constant(detail::sample_rows(ctx, b, c.embed_dim, sampler));
        const Var bad = tape.constant(detail::sample_rows(poor, b, width, sampler));
        const auto in = generator_input(tape, c, plus ? *c.ca : kNoParams, z, noise, false);
        const Var fake = tape.constant(generator_net(c).forward(tape, c.generator, in.input, false).value());
        const Var objective = disc_objective(tape, c, c.discriminator, real, fake, bad, true);
        const double value = objective.value().item();
        if (!std::isfinite(value)) throw DivergenceError("discriminator objective is not finite", epoch);
        log.disc_loss += value;
        d_opt.step(c.discriminator, tape.backward(scale(objective, -1.0)));
      }
      Tape tape;
      const Var z = tape.constant(detail::sample_rows(ctx, b, c.embed_dim, sampler));
      const auto in = generator_input(tape, c, plus ? *c.ca : kNoParams, z, noise, true);
      const Var fake = generator_net(c).forward(tape, c.generator, in.input, true);
      Var loss = adversarial_loss(tape, c, c.discriminator, fake);
      if (in.augmented) {
        const Var kl = ca_kl(in.augmented->mu_s, in.augmented->delta_s);
        log.kl_term += kl.value().item();
        loss = add(loss, kl);
      }
      const double value = loss.value().item();
      if (!std::isfinite(value)) throw DivergenceError("generator loss is not finite", epoch);
      log.gen_loss += value;
      ParamSet merged = detail::merge(c.generator, c.ca);
      g_opt.step(merged, tape.backward(loss));
      detail::split(merged, c.generator, c.ca);
    }
    log.disc_loss /= static_cast<double>(iters * static_cast<std::size_t>(cfg.kappa));
    log.gen_loss /= static_cast<double>(iters);
    log.kl_term /= static_cast<double>(iters);
    c.history.push_back(log);
    c.epoch = epoch;
    on_epoch(c);
  }
}

inline GanCheckpoint train_gan(const TrainingData& data, int n, int m, const TrainConfig& cfg) {
  if (data.embeddings.empty()) throw DataError("training needs context embeddings");
  GanCheckpoint c = init_checkpoint(cfg, n, m, data.embeddings.front().size());
  train_epochs(c, data, cfg.epochs, [](const GanCheckpoint&) {});
  return c;
}

inline GanCheckpoint train_lucgan(const TrainingData& data, int n, int m, TrainConfig cfg) {
  cfg.model = GanModel::kLucgan;
  return train_gan(data, n, m, cfg);
}

inline GanCheckpoint train_lucgan_plus(const TrainingData& data, int n, int m, TrainConfig cfg) {
  cfg.model = GanModel::kLucganPlus;
  return train_gan(data, n, m, cfg);
}

}  // namespace urbanplan
