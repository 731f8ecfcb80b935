#include <gtest/gtest.h>

#include "urbanplan/evalsuite.hpp"
#include "urbanplan/rng.hpp"

using namespace urbanplan;

namespace {

std::vector<double> random_simplex(std::size_t k, Rng& rng) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) s += (v = rng.uniform() + 1e-3);
  for (double& v : p) v /= s;
  return p;
}

LandUseConfig random_config(int n, int m, Rng& rng, double scale) {
  LandUseConfig c(n, m);
  for (double& v : c.counts) v = std::floor(rng.uniform() * scale);
  return c;
}

}  // namespace

// Reference values computed with numpy.
TEST(Divergences, KnownValues) {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(kl(p, q), 0.14384103622589042, 1e-15);
  EXPECT_NEAR(js(p, q), 0.033822075568605205, 1e-15);
  EXPECT_NEAR(hellinger(p, q), 0.1845919112825145, 1e-15);
  EXPECT_THROW(kl(p, {1.0}), ShapeError);
}

TEST(Divergences, ZeroMassTermsAndBounds) {
  EXPECT_EQ(kl({1.0, 0.0}, {0.5, 0.5}), std::log(2.0));
  EXPECT_NEAR(js({1.0, 0.0}, {0.0, 1.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(hellinger({1.0, 0.0}, {0.0, 1.0}), 1.0, 1e-15);
}

// Property: over random distributions, kl >= 0, js in [0, ln 2], js and hd
// symmetric, identity gives zero.
TEST(Divergences, RandomProperties) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(30);
    const auto p = random_simplex(k, rng), q = random_simplex(k, rng);
    EXPECT_GE(kl(p, q), 0.0);
    EXPECT_GE(js(p, q), 0.0);
    EXPECT_LE(js(p, q), std::log(2.0) + 1e-12);
    EXPECT_NEAR(js(p, q), js(q, p), 1e-12);
    EXPECT_NEAR(hellinger(p, q), hellinger(q, p), 1e-12);
    EXPECT_LE(hellinger(p, q), 1.0);
    EXPECT_NEAR(kl(p, p), 0.0, 1e-15);
    EXPECT_EQ(hellinger(p, p), 0.0);
  }
}

TEST(Wasserstein, KnownValues) {
  EXPECT_DOUBLE_EQ(wasserstein({0, 1, 2}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein({2, 0, 1}, {1, 2, 3}), 1.0);  // order does not matter
  EXPECT_DOUBLE_EQ(wasserstein({0, 1}, {0, 0.5, 1}), 0.0);  // [0, 1] resamples to [0, 0.5, 1]
  EXPECT_DOUBLE_EQ(wasserstein({5}, {1, 3}), 3.0);
  EXPECT_THROW(wasserstein({}, {1}), DataError);
}

// Property: shifting every sample by c moves the distance to the original by |c|.
TEST(Wasserstein, ShiftProperty) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(1 + rng.below(20));
    for (double& v : a) v = rng.uniform();
    auto b = a;
    const double c = rng.uniform(-2.0, 2.0);
    for (double& v : b) v += c;
    EXPECT_NEAR(wasserstein(a, b), std::abs(c), 1e-12);
    EXPECT_EQ(wasserstein(a, a), 0.0);
  }
}

TEST(DistProfile, MeanOfNormalizedConfigs) {
  const std::vector<LandUseConfig> cs{LandUseConfig(1, 2, {1, 3}), LandUseConfig(1, 2, {2, 2}),
                                      LandUseConfig(1, 2, {0, 0})};
  const auto prof = dist_profile(cs, 0.0);
  EXPECT_EQ(prof.used, 2u);
  EXPECT_EQ(prof.skipped, 1u);
  EXPECT_DOUBLE_EQ(prof.p[0], 0.375);
  EXPECT_DOUBLE_EQ(prof.p[1], 0.625);
  const auto smooth = dist_profile({LandUseConfig(1, 2, {1, 0})}, 0.5);
  EXPECT_DOUBLE_EQ(smooth.p[0], 0.75);
  EXPECT_DOUBLE_EQ(smooth.p[1], 0.25);
}

TEST(DistProfile, Errors) {
  EXPECT_THROW(dist_profile({}), DataError);
  EXPECT_THROW(dist_profile({LandUseConfig(1, 2)}), DataError);
  EXPECT_THROW(dist_profile({LandUseConfig(1, 2), LandUseConfig(2, 2)}), ShapeError);
}

// Property: scaling a configuration does not change its profile.
TEST(DistProfile, ScaleInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_config(3, 4, rng, 5.0);
    c.counts[0] += 1.0;
    auto d = c;
    for (double& v : d.counts) v *= 8.0;
    const auto a = dist_profile({c}), b = dist_profile({d});
    for (std::size_t k = 0; k < a.p.size(); ++k) EXPECT_NEAR(a.p[k], b.p[k], 1e-15);
  }
}

TEST(MetricReport, IdenticalSetsScoreZero) {
  Rng rng(6);
  std::vector<LandUseConfig> cs;
  for (int i = 0; i < 10; ++i) cs.push_back(random_config(2, 3, rng, 10.0));
  cs[0].counts[0] = 1.0;
  const auto r = metric_report(cs, cs);
  EXPECT_NEAR(r.kl, 0.0, 1e-15);
  EXPECT_NEAR(r.js, 0.0, 1e-15);
  EXPECT_EQ(r.hd, 0.0);
  EXPECT_EQ(r.wd, 0.0);
  EXPECT_EQ(r.n, 2);
  EXPECT_EQ(r.m, 3);
}

TEST(MetricReport, FartherSetScoresHigher) {
  Rng rng(7);
  std::vector<LandUseConfig> target, near, far;
  for (int i = 0; i < 30; ++i) {
    auto c = random_config(2, 2, rng, 10.0);
    c.at(0, 0, 0) += 20.0;
    target.push_back(c);
    auto d = random_config(2, 2, rng, 10.0);
    d.at(0, 0, 0) += 20.0;
    near.push_back(d);
    auto f = random_config(2, 2, rng, 10.0);
    f.at(1, 1, 1) += 20.0;
    far.push_back(f);
  }
  const auto a = metric_report(target, near), b = metric_report(target, far);
  EXPECT_EQ(metrics_smaller(a, b), 4);
  EXPECT_EQ(metrics_smaller(b, a), 0);
  EXPECT_THROW(metric_report(target, {LandUseConfig(3, 2, std::vector<double>(18, 1.0))}), ShapeError);
}

TEST(ScoringFeatures, RatiosDistinctAndLogTotal) {
  LandUseConfig c(1, 3, {2, 0, 6});
  const auto f = scoring_features(c);
  EXPECT_EQ(f, (std::vector<double>{0.25, 0.0, 0.75, 2.0, std::log(8.0)}));
  EXPECT_EQ(scoring_features(LandUseConfig(1, 2)), (std::vector<double>{0, 0, 0, 0}));
}

TEST(Scoring, SeparatesClasses) {
  Rng rng(8);
  std::vector<LandUseConfig> well, poor;
  for (int i = 0; i < 40; ++i) {
    auto w = random_config(2, 3, rng, 6.0);
    w.at(0, 0, 2) += 10.0;
    well.push_back(w);
    auto p = random_config(2, 3, rng, 2.0);
    p.at(1, 0, 0) += 10.0;
    poor.push_back(p);
  }
  const auto model = train_scoring(well, poor);
  std::vector<double> sw, sp;
  for (const auto& c : well) sw.push_back(score(model, c));
  for (const auto& c : poor) sp.push_back(score(model, c));
  EXPECT_GT(rank_auc(sw, sp), 0.99);
  for (double s : sw) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  EXPECT_LT(model.final_loss, std::log(2.0));
  EXPECT_EQ(train_scoring(well, poor), model);
  EXPECT_THROW(score(model, LandUseConfig(2, 2)), ShapeError);
  EXPECT_THROW(train_scoring(well, {}), DataError);
}

TEST(RankAuc, TiesAndOrder) {
  EXPECT_DOUBLE_EQ(rank_auc({0.9, 0.8}, {0.1, 0.2}), 1.0);
  EXPECT_DOUBLE_EQ(rank_auc({0.1}, {0.9}), 0.0);
  EXPECT_DOUBLE_EQ(rank_auc({0.5}, {0.5}), 0.5);
  EXPECT_DOUBLE_EQ(rank_auc({0.5, 0.9}, {0.5, 0.1}), 0.875);
  EXPECT_THROW(rank_auc({}, {0.1}), DataError);
}
