#pragma once

// Distribution distances between sets of configurations and a logistic
// scoring model.
//
// kl, js and hd compare distribution profiles: every configuration is
// normalised to a probability vector over its n*n*m bins, the vectors are
// averaged, then smoothed by eps and renormalised. wd compares the pooled
// per-bin values of the normalised configurations with a 1-D
// order-statistic Wasserstein-1 distance.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "urbanplan/configplan.hpp"
#include "urbanplan/errors.hpp"

namespace urbanplan {

inline constexpr double kProfileSmoothing = 1e-8;

struct DistProfile {
  int n = 0;
  int m = 0;
  std::vector<double> p;
  std::size_t used = 0;     // configurations averaged
  std::size_t skipped = 0;  // zero-total configurations left out

  std::size_t support_size() const { return p.size(); }
};

namespace detail {

inline void require_uniform_shape(const std::vector<LandUseConfig>& configs, const char* what) {
  if (configs.empty()) throw DataError(std::string(what) + ": empty configuration set");
  for (const auto& c : configs) {
    if (c.n != configs.front().n || c.m != configs.front().m || c.size() != configs.front().size()) {
      throw ShapeError(std::string(what) + ": configurations have different shapes");
    }
  }
}

inline void require_same_support(const std::vector<double>& p, const std::vector<double>& q, const char* what) {
  if (p.size() != q.size() || p.empty()) {
    throw ShapeError(std::string(what) + ": support sizes " + std::to_string(p.size()) + " and " +
                     std::to_string(q.size()) + " differ");
  }
}

}  // namespace detail

inline DistProfile dist_profile(const std::vector<LandUseConfig>& configs, double eps = kProfileSmoothing) {
  detail::require_uniform_shape(configs, "dist_profile");
  DistProfile out;
  out.n = configs.front().n;
  out.m = configs.front().m;
  out.p.assign(configs.front().size(), 0.0);
  for (const auto& c : configs) {
    const double total = c.total();
    if (!(total > 0.0)) {
      ++out.skipped;
      continue;
    }
    for (std::size_t k = 0; k < c.size(); ++k) out.p[k] += c.counts[k] / total;
    ++out.used;
  }
  if (out.used == 0) throw DataError("dist_profile: every configuration is empty");
  double sum = 0.0;
  for (double& v : out.p) {
    v = v / static_cast<double>(out.used) + eps;
    sum += v;
  }
  for (double& v : out.p) v /= sum;
  return out;
}

/// sum_x p(x) ln(p(x) / q(x)); terms with p(x) = 0 contribute nothing.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  detail::require_same_support(p, q, "kl");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return std::max(s, 0.0);
}

inline double js(const std::vector<double>& p, const std::vector<double>& q) {
  detail::require_same_support(p, q, "js");
  std::vector<double> mid(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mid[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl(p, mid) + 0.5 * kl(q, mid);
}

/// (1 / sqrt 2) * || sqrt p - sqrt q ||_2
inline double hellinger(const std::vector<double>& p, const std::vector<double>& q) {
  detail::require_same_support(p, q, "hellinger");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    s += d * d;
  }
  return std::min(std::sqrt(0.5 * s), 1.0);
}

/// Value at probability level `level` of sorted samples, linearly
/// interpolated between order statistics.
inline double sorted_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// 1-D Wasserstein-1 between two sample multisets. Both sides are sorted;
/// when sizes differ each is resampled to the larger size at evenly spaced
/// quantile levels.
inline double wasserstein(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DataError("wasserstein: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t size = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double level = size == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(size - 1);
    const double x = a.size() == size ? a[k] : sorted_quantile(a, level);
    const double y = b.size() == size ? b[k] : sorted_quantile(b, level);
    s += std::abs(x - y);
  }
  return s / static_cast<double>(size);
}

/// Per-bin values of every non-empty configuration, each normalised to sum 1.
inline std::vector<double> pooled_bin_values(const std::vector<LandUseConfig>& configs) {
  std::vector<double> out;
  for (const auto& c : configs) {
    const double total = c.total();
    if (!(total > 0.0)) continue;
    for (double v : c.counts) out.push_back(v / total);
  }
  return out;
}

struct MetricReport {
  double kl = 0.0;  // kl(well || generated)
  double js = 0.0;
  double hd = 0.0;
  double wd = 0.0;
  std::size_t well_count = 0;
  std::size_t generated_count = 0;
  std::size_t well_skipped = 0;
  std::size_t generated_skipped = 0;
  int n = 0;
  int m = 0;
  double epsilon = kProfileSmoothing;
  std::string profile_method = "mean normalized configuration";
  std::string wd_method = "1-D order statistics over pooled normalized bin values";

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline MetricReport metric_report(const std::vector<LandUseConfig>& well, const std::vector<LandUseConfig>& generated,
                                  double eps = kProfileSmoothing) {
  detail::require_uniform_shape(well, "metric_report (well)");
  detail::require_uniform_shape(generated, "metric_report (generated)");
  if (well.front().size() != generated.front().size() || well.front().n != generated.front().n) {
    throw ShapeError("metric_report: well and generated configurations have different shapes");
  }
  const DistProfile y = dist_profile(well, eps);
  const DistProfile yhat = dist_profile(generated, eps);
  MetricReport r;
  r.kl = kl(y.p, yhat.p);
  r.js = js(y.p, yhat.p);
  r.hd = hellinger(y.p, yhat.p);
  r.wd = wasserstein(pooled_bin_values(well), pooled_bin_values(generated));
  r.well_count = well.size();
  r.generated_count = generated.size();
  r.well_skipped = y.skipped;
  r.generated_skipped = yhat.skipped;
  r.n = y.n;
  r.m = y.m;
  r.epsilon = eps;
  return r;
}

/// Number of metrics on which `a` is strictly smaller than `b`.
inline int metrics_smaller(const MetricReport& a, const MetricReport& b) {
  return (a.kl < b.kl) + (a.js < b.js) + (a.hd < b.hd) + (a.wd < b.wd);
}

// ---------------------------------------------------------------------------
// Scoring model

struct ScoringConfig {
  int steps = 500;
  double lr = 0.1;
  double l2 = 1e-3;

  friend bool operator==(const ScoringConfig&, const ScoringConfig&) = default;
};

/// Channel ratios, number of non-empty channels, log of the total count.
/// An empty configuration maps to all zeros.
inline std::vector<double> scoring_features(const LandUseConfig& c) {
  const ConfigSummary s = config_summary(c);
  std::vector<double> f = s.ratios;
  double distinct = 0.0;
  for (double t : s.totals) distinct += t > 0.0 ? 1.0 : 0.0;
  f.push_back(distinct);
  const double total = c.total();
  f.push_back(total > 0.0 ? std::log(total) : 0.0);
  return f;
}

struct ScoringModel {
  int m = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> weights;
  double bias = 0.0;
  ScoringConfig config;
  std::size_t well_count = 0;
  std::size_t poor_count = 0;
  double final_loss = 0.0;

  friend bool operator==(const ScoringModel&, const ScoringModel&) = default;
};

namespace detail {

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline std::vector<double> standardize(const ScoringModel& model, std::vector<double> f) {
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = (f[j] - model.mean[j]) / model.stddev[j];
  return f;
}

}  // namespace detail

/// Logistic regression by full-batch gradient descent on the mean
/// cross-entropy plus (l2 / 2) * ||w||^2.
inline ScoringModel train_scoring(const std::vector<LandUseConfig>& well, const std::vector<LandUseConfig>& poor,
                                  const ScoringConfig& cfg = {}) {
  if (well.empty() || poor.empty()) throw DataError("train_scoring: both classes need at least one configuration");
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& c : well) x.push_back(scoring_features(c)), y.push_back(1.0);
  for (const auto& c : poor) x.push_back(scoring_features(c)), y.push_back(0.0);
  const std::size_t width = x.front().size();
  for (const auto& row : x)
    if (row.size() != width) throw ShapeError("train_scoring: configurations have different channel counts");

  ScoringModel model;
  model.m = well.front().m;
  model.config = cfg;
  model.well_count = well.size();
  model.poor_count = poor.size();
  const double rows = static_cast<double>(x.size());
  model.mean.assign(width, 0.0);
  model.stddev.assign(width, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < width; ++j) model.mean[j] += row[j] / rows;
  for (const auto& row : x)
    for (std::size_t j = 0; j < width; ++j) model.stddev[j] += (row[j] - model.mean[j]) * (row[j] - model.mean[j]) / rows;
  for (double& sd : model.stddev) {
    sd = std::sqrt(sd);
    if (!(sd > 1e-12)) sd = 1.0;
  }
  for (auto& row : x) row = detail::standardize(model, row);

  model.weights.assign(width, 0.0);
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<double> gw(width, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double logit = model.bias;
      for (std::size_t j = 0; j < width; ++j) logit += model.weights[j] * x[i][j];
      const double err = detail::logistic(logit) - y[i];
      for (std::size_t j = 0; j < width; ++j) gw[j] += err * x[i][j] / rows;
      gb += err / rows;
    }
    for (std::size_t j = 0; j < width; ++j) model.weights[j] -= cfg.lr * (gw[j] + cfg.l2 * model.weights[j]);
    model.bias -= cfg.lr * gb;
  }

  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double logit = model.bias;
    for (std::size_t j = 0; j < width; ++j) logit += model.weights[j] * x[i][j];
    const double p = std::clamp(detail::logistic(logit), 1e-15, 1.0 - 1e-15);
    loss -= (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p)) / rows;
  }
  model.final_loss = loss;
  return model;
}

/// Predicted probability that `config` is well planned. Clamped into the
/// open interval so saturated logits still satisfy 0 < score < 1.
inline double score(const ScoringModel& model, const LandUseConfig& config) {
  if (config.m != model.m) {
    throw ShapeError("score: model expects " + std::to_string(model.m) + " channels, got " + std::to_string(config.m));
  }
  const auto f = detail::standardize(model, scoring_features(config));
  double logit = model.bias;
  for (std::size_t j = 0; j < f.size(); ++j) logit += model.weights[j] * f[j];
  return std::clamp(detail::logistic(logit), 1e-12, 1.0 - 1e-12);
}

/// Probability that a random positive outscores a random negative; ties
/// count one half.
inline double rank_auc(const std::vector<double>& positive, const std::vector<double>& negative) {
  if (positive.empty() || negative.empty()) throw DataError("rank_auc: both score sets must be non-empty");
  double wins = 0.0;
  for (double p : positive)
    for (double q : negative) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return wins / (static_cast<double>(positive.size()) * static_cast<double>(negative.size()));
}

}  // namespace urbanplan
