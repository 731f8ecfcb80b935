#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"
#include "urbanplan/pipeline.hpp"

using namespace urbanplan;
using namespace urbanplan::pipeline;

namespace {

const char* cli() {
  const char* p = std::getenv("URBANPLAN_CLI");
  return p ? p : "urbanplan";
}

struct Outcome {
  int code = -1;
  std::string err;
};

// Runs the CLI with `args`, capturing stderr.
Outcome run(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string(cli()) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.err = read_text(err);
  return o;
}

const char* kSmallConfig = R"({
  "synth": {"poi_count": 8000, "checkin_count": 10000, "taxi_count": 3000, "bus_count": 3000,
            "bus_stop_count": 300, "grid": {"region_rows": 8, "region_cols": 8}},
  "vgae": {"epochs": 20, "latent": 16},
  "train": {"epochs": 2, "hidden": 32},
  "sweep_n": [5, 10],
  "sweep_models": ["untrained", "lucgan"]
})";

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing_support::scratch_dir("cli_pipeline");
    write_text(dir_ / "small.json", kSmallConfig);
  }

  static std::string common(const std::string& run_dir) {
    return "--config " + (dir_ / "small.json").string() + " --seed 3 --out " + (dir_ / run_dir).string();
  }

  // Runs every stage into `run_dir`; returns the first failing stage.
  static std::string full_run(const std::string& run_dir) {
    const std::vector<std::string> stages = {"synth",
                                             "ingest",
                                             "features",
                                             "graph",
                                             "embed",
                                             "quantify --n 5",
                                             "train --model lucgan --n 5",
                                             "generate --model lucgan --n 5",
                                             "evaluate --model lucgan --n 5",
                                             "generate --model untrained --n 5",
                                             "evaluate --model untrained --n 5",
                                             "score --n 5"};
    for (const auto& s : stages) {
      const auto sp = s.find(' ');
      const std::string cmd = sp == std::string::npos ? s : s.substr(0, sp);
      const std::string rest = sp == std::string::npos ? "" : s.substr(sp);
      const Outcome o = run(cmd + " " + common(run_dir) + rest, dir_);
      if (o.code != 0) return s + ": exit " + std::to_string(o.code) + ": " + o.err;
    }
    return "";
  }

  static fs::path dir_;
};

fs::path CliPipeline::dir_;

}  // namespace

TEST_F(CliPipeline, FullRunIsDeterministic) {
  ASSERT_EQ(full_run("a"), "");
  ASSERT_EQ(full_run("b"), "");
  const Layout a{dir_ / "a"}, b{dir_ / "b"};
  for (const auto& rel : {fs::path("evaluate/lucgan_n5/metric_report.json"), fs::path("evaluate/untrained_n5/metric_report.json"),
                          fs::path("embed/embeddings.csv"), fs::path("train/lucgan_n5/checkpoint.json"),
                          fs::path("score/n5/scores.csv"), fs::path("quantify/n5/labels.csv"),
                          fs::path("evaluate/lucgan_n5/manifest.json")}) {
    ASSERT_TRUE(fs::exists(a.root / rel)) << rel;
    EXPECT_EQ(read_text(a.root / rel), read_text(b.root / rel)) << rel;
  }
  // Manifests are relative to the run root.
  const std::string manifest = read_text(a.evaluate("lucgan", 5) / "manifest.json");
  EXPECT_EQ(manifest.find(dir_.string()), std::string::npos);
  EXPECT_NE(manifest.find("quantify/n5/configs.json"), std::string::npos);

  const json report = read_json(a.evaluate("lucgan", 5) / "metric_report.json");
  for (const char* k : {"kl", "js", "hd", "wd"}) EXPECT_GE(report.at(k).get<double>(), 0.0) << k;
  EXPECT_EQ(report.at("n"), 5);

  // Render a generated configuration.
  // Under render, --config names the configuration to draw.
  const Outcome r = run("render --out " + a.root.string() + " --config " + (a.generate("lucgan", 5) / "configs.json").string() +
                            " --area 9 --channel 4",
                        dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string pgm = read_text(a.render() / "configs_area9_ch4.pgm");
  EXPECT_EQ(pgm.substr(0, 9), "P5\n5 5\n25");
  EXPECT_TRUE(fs::exists(a.render() / "configs_area9_summary.csv"));

  // Sweep writes one report per (n, model).
  const Outcome s = run("sweep " + common("a"), dir_);
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(fs::exists(a.sweep() / "n10" / "untrained" / "metric_report.json"));
  EXPECT_TRUE(fs::exists(a.sweep() / "sweep.csv"));
}

TEST_F(CliPipeline, DifferentSeedChangesResults) {
  ASSERT_EQ(run("synth " + common("s1"), dir_).code, 0);
  ASSERT_EQ(run("synth --config " + (dir_ / "small.json").string() + " --seed 4 --out " + (dir_ / "s2").string(), dir_).code,
            0);
  EXPECT_NE(read_text(dir_ / "s1/raw/pois.csv"), read_text(dir_ / "s2/raw/pois.csv"));
}

TEST_F(CliPipeline, MissingStageInputNamesProducer) {
  const Outcome o = run("train " + common("empty") + " --n 5", dir_);
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("urbanplan quantify"), std::string::npos) << o.err;
  const Outcome f = run("features " + common("empty"), dir_);
  EXPECT_EQ(f.code, 3);
  EXPECT_NE(f.err.find("urbanplan ingest"), std::string::npos) << f.err;
}

TEST_F(CliPipeline, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("quantify " + common("cfg") + " --threshold 1.5", dir_).code, 2);
  EXPECT_EQ(run("train " + common("cfg") + " --model gan", dir_).code, 2);
  EXPECT_EQ(run("train " + common("cfg") + " --kappa 0", dir_).code, 2);
  EXPECT_EQ(run("quantify " + common("cfg") + " --n 5,10", dir_).code, 2);
  write_text(dir_ / "broken.json", "{\"vgae\": {\"epochs\": \"many\"}}");
  EXPECT_EQ(run("embed --config " + (dir_ / "broken.json").string() + " --out " + (dir_ / "cfg").string(), dir_).code, 2);
  write_text(dir_ / "notjson.json", "{");
  EXPECT_EQ(run("embed --config " + (dir_ / "notjson.json").string() + " --out " + (dir_ / "cfg").string(), dir_).code, 2);
  EXPECT_NE(run("nosuchcommand", dir_).code, 0);
}

TEST_F(CliPipeline, MalformedCsvExitsThree) {
  ASSERT_EQ(run("synth " + common("bad"), dir_).code, 0);
  std::ofstream(dir_ / "bad/raw/pois.csv", std::ios::app) << "39.85,116.25,not_a_number\n";
  const Outcome o = run("ingest " + common("bad"), dir_);
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("pois.csv:"), std::string::npos) << o.err;
}

TEST_F(CliPipeline, IngestFromExternalDirectory) {
  ASSERT_EQ(run("synth " + common("src"), dir_).code, 0);
  const Outcome o = run("ingest " + common("dst") + " --input " + (dir_ / "src/raw").string(), dir_);
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string manifest = read_text(dir_ / "dst/dataset/manifest.json");
  EXPECT_NE(manifest.find("external/pois.csv"), std::string::npos);
  EXPECT_EQ(read_text(dir_ / "dst/dataset/pois.csv").empty(), false);
}

// In-process helpers.

TEST(ScoreSplit, StratifiedAndDeterministic) {
  Labeling l;
  for (int id = 0; id < 20; ++id) l.well.emplace(id, LandUseConfig(1, 2, {1.0 + id, 1}));
  for (int id = 20; id < 30; ++id) l.poor.emplace(id, LandUseConfig(1, 2, {1, 1.0 + id}));
  const auto a = split_areas(l, 0.7, 5), b = split_areas(l, 0.7, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.train.size() + a.test.size(), 30u);
  int well_train = 0;
  for (AreaId id : a.train) well_train += id < 20;
  EXPECT_EQ(well_train, 14);
  EXPECT_EQ(a.train.size(), 21u);
  EXPECT_NE(split_areas(l, 0.7, 6).train, a.train);
}

TEST(PipelineConfig, ValidateCollectsProblems) {
  PipelineConfig c;
  c.threshold = 0.0;
  c.n = 0;
  c.sweep_models = {"gan"};
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("threshold"), std::string::npos) << msg;
    EXPECT_NE(msg.find("gan"), std::string::npos) << msg;
  }
}

TEST(PipelineConfig, JsonRoundTrip) {
  PipelineConfig c;
  c.seed = 42;
  c.train.epochs = 7;
  c.vgae.pooling = Pooling::kFlatten;
  c.sweep_n = {5, 25};
  PipelineConfig d;
  apply_config_json(json::parse(config_to_json(c).dump()), d);
  EXPECT_EQ(config_to_json(d), config_to_json(c));
}
