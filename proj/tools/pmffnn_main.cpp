// Command-line surface for the parallel multi-path FFNN kit: train a model
// from a config plus CSV or synthetic data, evaluate a saved model, print
// parameter accounting, or emit a synthetic dataset.
//
// Exit codes: 0 success, 2 configuration/schema problems, 3 data problems
// (files, parsing, dimension mismatches), 4 training divergence.

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmffnn/config.hpp"
#include "pmffnn/data.hpp"
#include "pmffnn/errors.hpp"
#include "pmffnn/metrics.hpp"
#include "pmffnn/model.hpp"
#include "pmffnn/serialize.hpp"
#include "pmffnn/train.hpp"

using namespace pmffnn;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSynthDataTag = 40001;

struct SynthSpec {
  int rows = 0;
  int features = 0;
  int groups = 0;
  int classes = 0;
  double noise = 0.1;
};

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  bool have_rows = false, have_features = false, have_groups = false, have_classes = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--synth", "expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "rows") {
        spec.rows = std::stoi(value);
        have_rows = true;
      } else if (key == "features") {
        spec.features = std::stoi(value);
        have_features = true;
      } else if (key == "groups") {
        spec.groups = std::stoi(value);
        have_groups = true;
      } else if (key == "classes") {
        spec.classes = std::stoi(value);
        have_classes = true;
      } else if (key == "noise") {
        spec.noise = std::stod(value);
      } else {
        throw ConfigError("--synth." + key, "unknown key");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("--synth." + key, "invalid value '" + value + "'");
    }
  }
  if (!have_rows || !have_features || !have_groups || !have_classes) {
    throw ConfigError("--synth", "rows, features, groups, and classes are all required");
  }
  return spec;
}

struct DataArgs {
  std::string csv_path;
  std::string target_column = "label";
  std::string synth_spec;
};

DatasetTable resolve_data(const DataArgs& args, Task task, std::uint64_t seed,
                          std::string* source_out) {
  if (!args.csv_path.empty() && !args.synth_spec.empty()) {
    throw ConfigError("--data", "use either --data or --synth, not both");
  }
  if (!args.csv_path.empty()) {
    if (source_out) *source_out = args.csv_path;
    return load_csv(args.csv_path, args.target_column, task);
  }
  if (!args.synth_spec.empty()) {
    if (task != Task::Classification) {
      throw ConfigError("--synth", "the synthetic generator produces classification data");
    }
    const SynthSpec spec = parse_synth_spec(args.synth_spec);
    if (source_out) *source_out = "synth:" + args.synth_spec;
    const std::uint64_t data_seed = Rng(seed).derive(kSynthDataTag).seed();
    return synth_blockwise(spec.rows, spec.features, spec.groups, spec.classes, spec.noise,
                           data_seed);
  }
  throw ConfigError("--data", "one of --data or --synth is required");
}

MetricsReport evaluate_model(ModelGraph& model, const DatasetTable& data) {
  const Matrix2D out = model.forward(data.features, Mode::Inference);
  if (model.task() == Task::Classification) {
    std::vector<int> pred(out.rows());
    for (std::size_t r = 0; r < out.rows(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < out.cols(); ++c) {
        if (out(r, c) > out(r, best)) best = c;
      }
      pred[r] = static_cast<int>(best);
    }
    return classification_metrics(confusion(data.labels, pred, model.n_outputs()));
  }
  return regression_metrics(out, data.targets);
}

json metrics_json(const MetricsReport& report) {
  json out;
  for (const auto& [name, value] : report.values) out[name] = value;
  return out;
}

json data_json(const std::string& source, const DatasetTable& data) {
  return json{{"source", source},
              {"rows", data.n_rows()},
              {"cols", data.features.cols()},
              {"fingerprint", dataset_fingerprint(data)}};
}

json train_config_json(const TrainConfig& tc) {
  json out{{"optimizer", tc.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
           {"lr", tc.lr},
           {"epochs", tc.epochs},
           {"batch_size", tc.batch_size},
           {"shuffle", tc.shuffle},
           {"loss", tc.loss == LossKind::CrossEntropy ? "cross_entropy" : "mse"}};
  if (tc.optimizer == OptimizerKind::SGD) {
    out["momentum"] = tc.momentum;
  } else {
    out["beta1"] = tc.beta1;
    out["beta2"] = tc.beta2;
    out["adam_eps"] = tc.adam_eps;
  }
  return out;
}

struct TrainArgs {
  std::string config_path;
  DataArgs data;
  std::uint64_t seed = 0;
  std::string out_prefix = "pmffnn_run";
  int threads = 0;
  TrainConfig tc;
  std::string optimizer_name = "adam";
  std::string loss_name = "auto";
  bool no_shuffle = false;
};

int run_train(const TrainArgs& args) {
  const ArchConfig cfg = load_arch_config(args.config_path);

  TrainConfig tc = args.tc;
  tc.seed = args.seed;
  tc.shuffle = !args.no_shuffle;
  if (args.optimizer_name == "adam") {
    tc.optimizer = OptimizerKind::Adam;
  } else if (args.optimizer_name == "sgd") {
    tc.optimizer = OptimizerKind::SGD;
  } else {
    throw ConfigError("--optimizer", "expected adam or sgd, got '" + args.optimizer_name + "'");
  }
  if (args.loss_name == "auto") {
    tc.loss = cfg.task == Task::Classification ? LossKind::CrossEntropy : LossKind::MSE;
  } else if (args.loss_name == "cross_entropy") {
    tc.loss = LossKind::CrossEntropy;
  } else if (args.loss_name == "mse") {
    tc.loss = LossKind::MSE;
  } else {
    throw ConfigError("--loss", "expected auto, cross_entropy, or mse, got '" + args.loss_name +
                                    "'");
  }
  if (tc.loss == LossKind::CrossEntropy && cfg.task != Task::Classification) {
    throw ConfigError("--loss", "cross_entropy requires a classification task");
  }
  if (tc.loss == LossKind::MSE && cfg.task != Task::Regression) {
    throw ConfigError("--loss", "mse requires a regression task");
  }

  std::string source;
  const DatasetTable data = resolve_data(args.data, cfg.task, args.seed, &source);

  ModelGraph model = ModelGraph::build(cfg, args.seed);
  model.set_threads(args.threads);

  const FitReport report =
      fit(model, data, tc, nullptr, [&](int epoch, const EpochStats& stats) {
        std::printf("epoch %d/%d  loss %.6f  (%.2fs)\n", epoch, tc.epochs, stats.train_loss,
                    stats.seconds);
        std::fflush(stdout);
      });

  const MetricsReport final_metrics = evaluate_model(model, data);

  const std::string model_path = args.out_prefix + ".model.bin";
  const std::string manifest_path = args.out_prefix + ".manifest.json";
  save_model_params(model_path, model);

  // Wall-clock timings stay out of the manifest: re-running the same
  // flags and seed must reproduce it byte for byte.
  json fit_json;
  std::vector<double> losses;
  losses.reserve(report.epochs.size());
  for (const auto& epoch : report.epochs) losses.push_back(epoch.train_loss);
  fit_json["epoch_losses"] = losses;

  json manifest{{"command", "train"},
                {"seed", args.seed},
                {"config", json::parse(arch_config_to_json(cfg))},
                {"train_config", train_config_json(tc)},
                {"data", data_json(source, data)},
                {"fit", fit_json},
                {"final_train_metrics", metrics_json(final_metrics)},
                {"model_file", model_path}};
  atomic_write_file(manifest_path, manifest.dump(2) + "\n");

  std::cout << "\nfinal train metrics:\n"
            << render_metrics_table({model_kind_name(cfg.kind)}, {final_metrics});
  std::cout << "\nwrote " << model_path << "\nwrote " << manifest_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string config_path;
  std::string model_path;
  DataArgs data;
  std::uint64_t seed = 0;
  std::string out_path;
  int threads = 0;
};

int run_eval(const EvalArgs& args) {
  const ArchConfig cfg = load_arch_config(args.config_path);
  ModelGraph model = ModelGraph::build(cfg, 0);
  model.set_threads(args.threads);
  load_model_params(args.model_path, model);

  std::string source;
  const DatasetTable data = resolve_data(args.data, cfg.task, args.seed, &source);
  if (static_cast<int>(data.features.cols()) != model.n_features()) {
    throw ShapeError("eval: data has " + std::to_string(data.features.cols()) +
                     " features, model expects " + std::to_string(model.n_features()));
  }

  const MetricsReport report = evaluate_model(model, data);
  std::cout << render_metrics_table({model_kind_name(cfg.kind)}, {report});

  if (!args.out_path.empty()) {
    json out{{"command", "eval"},
             {"task", task_name(cfg.task)},
             {"data", data_json(source, data)},
             {"metrics", metrics_json(report)}};
    atomic_write_file(args.out_path, out.dump(2) + "\n");
  }
  return 0;
}

struct DescribeArgs {
  std::string config_path;
};

int run_describe(const DescribeArgs& args) {
  const ArchConfig cfg = load_arch_config(args.config_path);
  ModelGraph model = ModelGraph::build(cfg, 0);
  const ParamBreakdown pb = model.count_parameters();

  std::printf("model: %s  task: %s  features: %d  outputs: %d\n\n",
              model_kind_name(cfg.kind).c_str(), task_name(cfg.task).c_str(), cfg.n_features,
              cfg.n_outputs);
  std::printf("%-10s %10s %18s %14s\n", "branch", "input_dim", "first_layer_params",
              "total_params");
  for (const auto& b : pb.branches) {
    std::printf("%-10s %10d %18lld %14lld\n", b.name.c_str(), b.input_dim, b.first_dense, b.total);
  }
  std::printf("%-10s %10s %18s %14lld\n", "head", "-", "-", pb.head);
  std::printf("%-10s %10s %18s %14lld\n", "total", "", "", pb.total);

  if (cfg.kind == ModelKind::PMFFNN) {
    std::printf("\nfirst-layer comparison against a width-matched monolithic stack:\n");
    std::printf("  pathways first-layer params:                 %lld\n", pb.first_layer_pathways);
    std::printf("  monolithic Dense(%d -> %d) params:           %lld\n", cfg.n_features,
                pb.monolithic_hidden_width, pb.first_layer_monolithic);
    std::printf("  reduction ratio:                             %.2fx\n", pb.first_layer_reduction);
  }
  return 0;
}

struct SynthArgs {
  int rows = 0;
  int features = 0;
  int groups = 0;
  int classes = 0;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_synth(const SynthArgs& args) {
  // Same seed derivation as `train --synth`, so the emitted CSV matches
  // what a training run with the same seed sees.
  const std::uint64_t data_seed = Rng(args.seed).derive(kSynthDataTag).seed();
  const DatasetTable table =
      synth_blockwise(args.rows, args.features, args.groups, args.classes, args.noise, data_seed);
  save_csv(args.out_path, table, "label");
  std::cout << "wrote " << args.out_path << " (" << table.n_rows() << " rows, "
            << table.features.cols() << " features)\n";
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const StateError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void add_data_flags(CLI::App* cmd, DataArgs& data) {
  cmd->add_option("--data", data.csv_path, "CSV data file (header row required)");
  cmd->add_option("--target", data.target_column, "target column name (default: label)");
  cmd->add_option("--synth", data.synth_spec,
                  "synthetic data spec: rows=N,features=N,groups=N,classes=N[,noise=F]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel multi-path feed-forward network kit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write model + manifest");
  train_cmd->add_option("--config", train_args.config_path, "architecture config (JSON)")
      ->required();
  add_data_flags(train_cmd, train_args.data);
  train_cmd->add_option("--seed", train_args.seed, "random seed (mandatory: runs must reproduce)")
      ->required();
  train_cmd->add_option("--out", train_args.out_prefix,
                        "output prefix for <prefix>.model.bin and <prefix>.manifest.json");
  train_cmd->add_option("--epochs", train_args.tc.epochs, "training epochs");
  train_cmd->add_option("--batch-size", train_args.tc.batch_size, "mini-batch size");
  train_cmd->add_option("--lr", train_args.tc.lr, "learning rate");
  train_cmd->add_option("--momentum", train_args.tc.momentum, "SGD momentum");
  train_cmd->add_option("--optimizer", train_args.optimizer_name, "adam | sgd");
  train_cmd->add_option("--loss", train_args.loss_name, "auto | cross_entropy | mse");
  train_cmd->add_flag("--no-shuffle", train_args.no_shuffle, "keep file row order every epoch");
  train_cmd->add_option("--threads", train_args.threads,
                        "pathway parallelism cap (1 = sequential, 0 = hardware)");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
  eval_cmd->add_option("--config", eval_args.config_path, "architecture config (JSON)")
      ->required();
  eval_cmd->add_option("--model", eval_args.model_path, "model parameter file")->required();
  add_data_flags(eval_cmd, eval_args.data);
  eval_cmd->add_option("--seed", eval_args.seed, "seed used to regenerate --synth data");
  eval_cmd->add_option("--out", eval_args.out_path, "write metrics as JSON to this path");
  eval_cmd->add_option("--threads", eval_args.threads, "pathway parallelism cap");

  DescribeArgs describe_args;
  CLI::App* describe_cmd =
      app.add_subcommand("describe", "print per-branch parameter accounting");
  describe_cmd->add_option("--config", describe_args.config_path, "architecture config (JSON)")
      ->required();

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  synth_cmd->add_option("--rows", synth_args.rows)->required();
  synth_cmd->add_option("--features", synth_args.features)->required();
  synth_cmd->add_option("--groups", synth_args.groups)->required();
  synth_cmd->add_option("--classes", synth_args.classes)->required();
  synth_cmd->add_option("--noise", synth_args.noise, "score noise stddev");
  synth_cmd->add_option("--seed", synth_args.seed)->required();
  synth_cmd->add_option("--out", synth_args.out_path, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag misuse is a configuration problem
  }

  if (train_cmd->parsed()) return guarded([&] { return run_train(train_args); });
  if (eval_cmd->parsed()) return guarded([&] { return run_eval(eval_args); });
  if (describe_cmd->parsed()) return guarded([&] { return run_describe(describe_args); });
  if (synth_cmd->parsed()) return guarded([&] { return run_synth(synth_args); });
  return 2;
}
