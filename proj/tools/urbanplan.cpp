// urbanplan: command-line driver for the land-use planning pipeline.
// Exit codes: 0 ok, 1 usage, 2 config error, 3 data error, 4 divergence.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "urbanplan/pipeline.hpp"

namespace {

using namespace urbanplan;
using namespace urbanplan::pipeline;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  std::string model = "lucgan";
  std::string n_list;
  std::string models;
  std::optional<double> threshold;
  std::optional<int> kappa;
  std::optional<int> epochs;
  bool no_self_loops = false;
  std::string input;
  std::string generated;
  std::string render_config;
  int channel = 14;
  std::optional<std::int64_t> area;
};

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--n: '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ConfigError("--n: empty list");
  return out;
}

std::vector<std::string> parse_models(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

/// Defaults, then --config, then individual flags.
PipelineConfig resolve(const Flags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw ConfigError("--config: no such file " + f.config);
    json j;
    try {
      j = read_json(f.config);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    apply_config_json(j, cfg);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.threshold) cfg.threshold = *f.threshold;
  if (f.kappa) cfg.train.kappa = *f.kappa;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.no_self_loops) cfg.vgae.self_loops = false;
  if (!f.n_list.empty()) {
    cfg.sweep_n = parse_n_list(f.n_list);
    cfg.n = cfg.sweep_n.front();
  }
  if (!f.models.empty()) cfg.sweep_models = parse_models(f.models);
  cfg.propagate_seed();
  cfg.validate();
  return cfg;
}

void require_single_n(const Flags& f, const PipelineConfig& cfg, const char* cmd) {
  if (!f.n_list.empty() && cfg.sweep_n.size() != 1) {
    throw ConfigError(std::string(cmd) + ": --n takes a single value here (use sweep for lists)");
  }
}

void require_model(const std::string& model, bool allow_untrained) {
  if (model == "lucgan" || model == "lucgan-plus") return;
  if (allow_untrained && model == kUntrained) return;
  throw ConfigError("--model must be lucgan or lucgan-plus" + std::string(allow_untrained ? " or untrained" : "") +
                    " (got '" + model + "')");
}

void print_report(const MetricReport& r) {
  std::cout << "kl=" << r.kl << " js=" << r.js << " hd=" << r.hd << " wd=" << r.wd << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Land-use configuration planning pipeline"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "pipeline configuration JSON");
    sub->add_option("--seed", f.seed, "seed for every stochastic stage");
    sub->add_option("--out", f.out, "run directory")->capture_default_str();
    sub->add_option("--threshold", f.threshold, "quality threshold in (0, 1)");
  };
  auto with_n = [&](CLI::App* sub) { sub->add_option("--n", f.n_list, "cells per area side"); };
  auto with_model = [&](CLI::App* sub) {
    sub->add_option("--model", f.model, "lucgan | lucgan-plus")->capture_default_str();
  };
  auto with_training = [&](CLI::App* sub) {
    sub->add_option("--kappa", f.kappa, "discriminator steps per generator step");
    sub->add_option("--epochs", f.epochs, "training epochs");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic city into <out>/raw");
  common(synth);
  auto* ingest = app.add_subcommand("ingest", "parse and clean the CSV sources");
  common(ingest);
  ingest->add_option("--input", f.input, "directory with the five CSVs and grid.json (default <out>/raw)");
  auto* features = app.add_subcommand("features", "extract context features per target area");
  common(features);
  auto* graph = app.add_subcommand("graph", "build spatial attributed graphs");
  common(graph);
  auto* embed = app.add_subcommand("embed", "train the graph autoencoder and export context embeddings");
  common(embed);
  embed->add_flag("--no-self-loops", f.no_self_loops, "propagate over A instead of A + I");
  auto* quantify = app.add_subcommand("quantify", "quantify configurations and label plan quality");
  common(quantify);
  with_n(quantify);
  auto* train = app.add_subcommand("train", "train LUCGAN or LUCGAN+");
  common(train);
  with_n(train);
  with_model(train);
  with_training(train);
  auto* generate = app.add_subcommand("generate", "generate configurations for every labeled area");
  common(generate);
  with_n(generate);
  generate->add_option("--model", f.model, "lucgan | lucgan-plus | untrained")->capture_default_str();
  auto* evaluate = app.add_subcommand("evaluate", "compare generated and well-planned configurations");
  common(evaluate);
  with_n(evaluate);
  evaluate->add_option("--model", f.model, "lucgan | lucgan-plus | untrained")->capture_default_str();
  evaluate->add_option("--generated", f.generated, "configuration set to evaluate instead of the generate output");
  auto* score = app.add_subcommand("score", "fit the scoring model on a 70/30 split");
  common(score);
  with_n(score);
  auto* sweep = app.add_subcommand("sweep", "metrics across square sizes");
  common(sweep);
  with_n(sweep);
  with_training(sweep);
  sweep->add_option("--models", f.models, "comma list of untrained, lucgan, lucgan-plus");
  auto* render = app.add_subcommand("render", "heatmap and category summary of one configuration");
  common(render);
  render->add_option("--configuration,--input", f.render_config, "configuration JSON (single or set)")->required();
  render->add_option("--channel", f.channel, "POI category channel")->capture_default_str();
  render->add_option("--area", f.area, "area id when the file holds a set");

  // `render --config c.json` names the configuration to draw, so there
  // --config is rewritten before parsing.
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args.front() == "render") {
    for (auto& a : args) {
      if (a == "--config") a = "--configuration";
      else if (a.rfind("--config=", 0) == 0) a = "--configuration=" + a.substr(9);
    }
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const PipelineConfig cfg = resolve(f);
    const Layout layout{f.out};
    if (*synth) {
      run_synth(layout, cfg);
      std::cout << "wrote " << layout.raw().string() << "\n";
    } else if (*ingest) {
      const LoadReport r = run_ingest(layout, cfg, f.input);
      std::cout << "pois kept " << r.pois.kept << " dropped " << r.pois.dropped << "; months " << r.months << ", days "
                << r.days << "\n";
    } else if (*features) {
      run_features(layout, cfg);
    } else if (*graph) {
      run_graph(layout, cfg);
    } else if (*embed) {
      const VgaeModel m = run_embed(layout, cfg);
      std::cout << "loss " << m.loss_history.front() << " -> " << m.loss_history.back() << "\n";
    } else if (*quantify) {
      require_single_n(f, cfg, "quantify");
      const Labeling l = run_quantify(layout, cfg, cfg.n);
      for (const auto& w : l.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "well " << l.well.size() << ", poor " << l.poor.size() << "\n";
    } else if (*train) {
      require_single_n(f, cfg, "train");
      require_model(f.model, false);
      const GanCheckpoint c = run_train(layout, cfg, f.model, cfg.n);
      if (!c.history.empty()) {
        const auto& h = c.history.back();
        std::cout << "epoch " << h.epoch << " disc " << h.disc_loss << " gen " << h.gen_loss << " kl " << h.kl_term
                  << "\n";
      }
    } else if (*generate) {
      require_single_n(f, cfg, "generate");
      require_model(f.model, true);
      run_generate(layout, cfg, f.model, cfg.n);
    } else if (*evaluate) {
      require_single_n(f, cfg, "evaluate");
      require_model(f.model, true);
      print_report(run_evaluate(layout, cfg, f.model, cfg.n, f.generated));
    } else if (*score) {
      require_single_n(f, cfg, "score");
      const ScoringOutcome s = run_score(layout, cfg, cfg.n);
      std::cout << "held-out well mean " << s.well_mean << ", poor mean " << s.poor_mean << ", rank auc " << s.auc
                << "\n";
    } else if (*sweep) {
      for (const auto& row : run_sweep(layout, cfg)) {
        std::cout << "n=" << row.n << " " << row.model << ": ";
        print_report(row.report);
      }
    } else if (*render) {
      std::optional<AreaId> area;
      if (f.area) area = static_cast<AreaId>(*f.area);
      std::cout << "wrote " << run_render(layout, cfg, f.render_config, f.channel, area).string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
