#include <gtest/gtest.h>

#include "support.hpp"
#include "urbanplan/serialize.hpp"

using namespace urbanplan;

namespace {

json round_trip(const json& j) { return json::parse(j.dump(2)); }

}  // namespace

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Json, TensorAndParams) {
  Rng rng(1);
  ParamSet p{{"a.W", nn::glorot(3, 4, rng)}, {"b", Tensor({1, 2}, 0.1)}};
  EXPECT_EQ(params_from_json(round_trip(params_to_json(p))), p);
}

TEST(Json, GridAndSynthKeepDefaultsForMissingKeys) {
  SynthParams p;
  p.grid.region_rows = 11;
  p.poi_count = 123;
  json j = round_trip(json(p));
  EXPECT_EQ(j.get<SynthParams>().grid, p.grid);
  EXPECT_EQ(j.get<SynthParams>().poi_count, 123u);
  j.erase("poi_count");
  EXPECT_EQ(j.get<SynthParams>().poi_count, SynthParams{}.poi_count);
}

TEST(Json, GraphEdgeList) {
  SpatialGraph g{12, ring_adjacency(), Tensor({8, 2}, 0.5)};
  g.features(3, 1) = -2.25;
  const json j = round_trip(graph_to_json(g, {"x", "y"}));
  EXPECT_EQ(j.at("edges").size(), 8u);
  const auto back = graph_from_json(j);
  EXPECT_EQ(back.area, 12);
  EXPECT_EQ(back.adjacency, g.adjacency);
  EXPECT_EQ(back.features, g.features);
  json bad = j;
  bad["edges"].push_back({0, 9});
  EXPECT_THROW(graph_from_json(bad), DataError);
}

TEST(Json, VgaeModel) {
  std::vector<SpatialGraph> graphs;
  Rng rng(2);
  for (int i = 0; i < 3; ++i) {
    Tensor x({8, 3});
    for (double& v : x.data()) v = rng.normal();
    graphs.push_back({i, ring_adjacency(), x});
  }
  VgaeConfig cfg;
  cfg.hidden = 4;
  cfg.latent = 3;
  cfg.epochs = 3;
  cfg.pooling = Pooling::kFlatten;
  const auto m = train_vgae(graphs, cfg);
  const auto back = vgae_from_json(round_trip(vgae_to_json(m)));
  EXPECT_EQ(back.params, m.params);
  EXPECT_EQ(back.loss_history, m.loss_history);
  EXPECT_EQ(back.config.pooling, Pooling::kFlatten);
  EXPECT_EQ(embed(back, graphs[1]), embed(m, graphs[1]));
}

TEST(Csv, EmbeddingsRoundTripExactly) {
  const std::map<AreaId, std::vector<double>> e{{3, {0.1, -1e-300, 1.0 / 3.0}}, {17, {2.5, 0.0, -7.125}}};
  const auto path = testing_support::scratch_dir("embeddings") / "e.csv";
  write_text(path, embeddings_csv(e));
  EXPECT_EQ(read_embeddings_csv(path), e);
  write_text(path, "area_id,e0\n1,abc\n");
  EXPECT_THROW(read_embeddings_csv(path), DataError);
}

TEST(Json, ConfigSetRoundTrip) {
  std::map<AreaId, LandUseConfig> set{{1, LandUseConfig(1, 2, {1, 2})}, {5, LandUseConfig(1, 2, {0, 0.5})}};
  EXPECT_EQ(config_set_from_json(round_trip(config_set_to_json(set, 1, 2))), set);
  EXPECT_EQ(config_from_json(round_trip(config_to_json(set.at(1)))), set.at(1));
  json bad = config_to_json(set.at(1));
  bad["dtype"] = "float32";
  EXPECT_THROW(config_from_json(bad), DataError);
  bad = config_to_json(set.at(1));
  bad["values"].push_back(1.0);
  EXPECT_THROW(config_from_json(bad), ShapeError);
}

TEST(Csv, ConfigRowsInLayoutOrder) {
  const LandUseConfig c(1, 2, {1.5, 0});
  EXPECT_EQ(config_csv(c), "i,j,channel,value\n0,0,0,1.5\n0,0,1,0\n");
}

TEST(Json, CheckpointRoundTrip) {
  TrainConfig cfg;
  cfg.model = GanModel::kLucganPlus;
  cfg.hidden = 4;
  cfg.ca_dim = 2;
  cfg.noise_dim = 1;
  cfg.seed = 3;
  auto c = init_checkpoint(cfg, 2, 2, 3);
  c.history.push_back({1, -1.25, 0.5, 0.125});
  c.epoch = 1;
  const auto back = checkpoint_from_json(round_trip(checkpoint_to_json(c)));
  EXPECT_EQ(back.generator, c.generator);
  EXPECT_EQ(back.discriminator, c.discriminator);
  EXPECT_EQ(*back.ca, *c.ca);
  EXPECT_EQ(back.config.model, GanModel::kLucganPlus);
  EXPECT_EQ(back.config.seed, 3u);
  EXPECT_EQ(back.history.size(), 1u);
  EXPECT_EQ(back.history[0].kl_term, 0.125);
  json bad = checkpoint_to_json(c);
  bad.erase("ca");
  EXPECT_THROW(checkpoint_from_json(bad), DataError);
}

TEST(Csv, TrainLogRoundTrip) {
  const std::vector<EpochLog> h{{1, -1.5, 0.25, 0.0}, {2, -1.0 / 3.0, 0.1, 2.0}};
  const auto path = testing_support::scratch_dir("trainlog") / "log.csv";
  write_text(path, train_log_csv(h));
  const auto back = read_train_log_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].disc_loss, -1.0 / 3.0);
  EXPECT_EQ(back[1].kl_term, 2.0);
}

TEST(Json, MetricReportAndScoringModel) {
  MetricReport r;
  r.kl = 0.1;
  r.js = 0.02;
  r.hd = 0.3;
  r.wd = 1e-4;
  r.n = 10;
  r.m = 20;
  r.well_count = 5;
  EXPECT_EQ(round_trip(json(r)).get<MetricReport>(), r);

  ScoringModel s;
  s.m = 2;
  s.mean = {0.5, 1.0};
  s.stddev = {1.0, 2.0};
  s.weights = {-0.25, 3.0};
  s.bias = 0.125;
  s.final_loss = 0.3;
  EXPECT_EQ(round_trip(json(s)).get<ScoringModel>(), s);
}

TEST(Files, DecodeAndParseErrorsAreDataErrors) {
  const auto dir = testing_support::scratch_dir("files");
  write_text(dir / "bad.json", "{ not json");
  EXPECT_THROW(read_json(dir / "bad.json"), DataError);
  EXPECT_THROW(read_text(dir / "missing.json"), DataError);
  const json j{{"n", 2}};
  EXPECT_THROW(decode_json("config", [&] { return config_from_json(j); }), DataError);
  write_text(dir / "nested/deeper/x.txt", "hi");
  EXPECT_EQ(read_text(dir / "nested/deeper/x.txt"), "hi");
  EXPECT_EQ(file_hash(dir / "nested/deeper/x.txt"), hex64(fnv1a64("hi")));
}
