// Acceptance suite: one test case per criterion, each printing a
// [PASS] line with the measured numbers when its assertions hold.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pmffnn/data.hpp"
#include "pmffnn/metrics.hpp"
#include "pmffnn/model.hpp"
#include "pmffnn/serialize.hpp"
#include "pmffnn/train.hpp"
#include "test_support.hpp"

#ifndef PMFFNN_CLI_PATH
#error "PMFFNN_CLI_PATH must point at the built CLI binary"
#endif

namespace fs = std::filesystem;
using namespace pmffnn;
using nlohmann::json;
using pmffnn::testing::central_diff;
using pmffnn::testing::check_layer_gradients;
using pmffnn::testing::grad_close;

namespace {

int dir_counter = 0;

struct CliDir {
  fs::path dir;
  CliDir() {
    dir = fs::temp_directory_path() / ("pmffnn_acceptance_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(dir_counter++));
    fs::create_directories(dir);
  }
  ~CliDir() { fs::remove_all(dir); }

  int run(const std::string& args, std::string* output = nullptr) const {
    const std::string out_file = (dir / "cmd_output.txt").string();
    const std::string cmd = "cd '" + dir.string() + "' && '" + PMFFNN_CLI_PATH + "' " + args +
                            " > '" + out_file + "' 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
      std::ifstream in(out_file);
      output->assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return status == -1 ? -1 : WEXITSTATUS(status);
  }

  void write(const std::string& name, const std::string& contents) const {
    std::ofstream out(dir / name);
    out << contents;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
};

double accuracy_on(ModelGraph& model, const DatasetTable& data) {
  const Matrix2D out = model.forward(data.features, Mode::Inference);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < out.cols(); ++c) {
      if (out(r, c) > out(r, best)) best = c;
    }
    if (static_cast<int>(best) == data.labels[r]) ++hits;
  }
  return double(hits) / double(out.rows());
}

ArchConfig tiny_pmffnn_config() {
  ArchConfig cfg;
  cfg.kind = ModelKind::PMFFNN;
  cfg.n_features = 4;
  cfg.n_outputs = 2;
  cfg.task = Task::Classification;
  cfg.groups = std::vector<std::vector<int>>{{0, 1}, {2, 3}};
  cfg.pathway = PathwayConfig{2, 0, 0.0, 1};
  cfg.head = HeadConfig{2, 0.0};
  return cfg;
}

ArchConfig tiny_deep_config() {
  ArchConfig cfg;
  cfg.kind = ModelKind::DeepFFNN;
  cfg.n_features = 4;
  cfg.n_outputs = 2;
  cfg.task = Task::Classification;
  cfg.pathway = PathwayConfig{2, 0, 0.0, 1};
  cfg.head = HeadConfig{2, 0.0};
  return cfg;
}

ArchConfig tiny_cnn_config() {
  ArchConfig cfg;
  cfg.kind = ModelKind::CNN1D;
  cfg.n_features = 6;
  cfg.n_outputs = 2;
  cfg.task = Task::Classification;
  cfg.conv = ConvConfig{3, 2, 1};
  cfg.head = HeadConfig{2, 0.0};
  return cfg;
}

// Central finite differences over every trainable parameter against the
// analytic gradients from one fused-loss backward pass.
void full_model_grad_trial(const ArchConfig& cfg, std::uint64_t seed, double* worst_rel) {
  ModelGraph model = ModelGraph::build(cfg, seed);
  Rng data_rng(seed ^ 0x5a5a);
  const Matrix2D x = data_rng.normal_matrix(3, cfg.n_features, 0.0, 1.0);
  std::vector<int> labels;
  for (int r = 0; r < 3; ++r) labels.push_back(int(data_rng.next_below(cfg.n_outputs)));

  auto loss_fn = [&] { return cross_entropy(model.forward(x, Mode::Training), labels).loss; };

  model.zero_grads();
  const LossGrad lg = cross_entropy(model.forward(x, Mode::Training), labels);
  model.backward(lg.grad, true);

  for (auto& p : model.trainable_params()) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const double analytic = p.grad->flat()[i];
      const double numeric = central_diff(loss_fn, &p.value->flat()[i]);
      const double denom = std::max(std::abs(analytic), std::abs(numeric));
      // track the worst ratio above the finite-difference noise floor
      if (denom > 1e-7) *worst_rel = std::max(*worst_rel, std::abs(analytic - numeric) / denom);
      REQUIRE_MESSAGE(grad_close(analytic, numeric), "model grad mismatch at ", p.name, "[", i,
                      "]: ", analytic, " vs ", numeric);
    }
  }
}

const char* kSynthConfig = R"({
  "kind": "pmffnn",
  "n_features": 64,
  "n_outputs": 4,
  "task": "classification",
  "groups": 4
})";

}  // namespace

TEST_CASE("criterion 1: gradient correctness for every layer kind and three full models") {
  const auto t0 = std::chrono::steady_clock::now();
  Rng meta(7);
  const int trials = 20;

  // every layer kind, >= 20 random configurations each
  for (int t = 0; t < trials; ++t) {
    const int in = 1 + int(meta.next_below(8));
    const int out = 1 + int(meta.next_below(8));
    const int batch = 1 + int(meta.next_below(5));
    {
      Rng init(10 + t);
      DenseLayer layer(in, out, init);
      const Matrix2D x = Rng(100 + t).normal_matrix(batch, in, 0.0, 1.0);
      REQUIRE(check_layer_gradients(layer, x, Mode::Training, 200 + t).ok);
    }
    {
      BatchNormLayer layer(in);
      const Matrix2D x = Rng(300 + t).normal_matrix(2 + batch, in, 0.3, 1.4);
      REQUIRE(check_layer_gradients(layer, x, Mode::Training, 400 + t).ok);
    }
    {
      DropoutLayer layer(in, 0.1 + 0.7 * meta.uniform01());
      const Matrix2D x = Rng(500 + t).normal_matrix(batch, in, 0.0, 1.0);
      REQUIRE(check_layer_gradients(layer, x, Mode::Training, 600 + t).ok);
    }
    for (auto kind : {ActivationKind::Selu, ActivationKind::Sigmoid, ActivationKind::Relu,
                      ActivationKind::Softmax}) {
      ActivationLayer layer(kind, in);
      Matrix2D x = Rng(700 + t).normal_matrix(batch, in, 0.0, 1.0);
      for (double& v : x.flat()) {
        if (std::abs(v) < 1e-3) v = v < 0 ? -1e-3 : 1e-3;  // stay off piecewise kinks
      }
      REQUIRE(check_layer_gradients(layer, x, Mode::Training, 800 + t).ok);
    }
    {
      const int k = 1 + int(meta.next_below(3));
      const int len = k + int(meta.next_below(4));
      const int ci = 1 + int(meta.next_below(2));
      const int co = 1 + int(meta.next_below(3));
      Rng init(900 + t);
      Conv1DLayer layer(len, ci, k, co, init);
      const Matrix2D x = Rng(1000 + t).normal_matrix(batch, std::size_t(ci) * len, 0.0, 1.0);
      REQUIRE(check_layer_gradients(layer, x, Mode::Training, 1100 + t).ok);
    }
  }

  // three full tiny models, >= 20 random trials each
  double worst_rel = 0.0;
  ModelGraph probe = ModelGraph::build(tiny_pmffnn_config(), 1);
  long long probe_params = 0;
  for (const auto& p : probe.trainable_params()) {
    probe_params += static_cast<long long>(p.value->size());
  }
  REQUIRE(probe_params <= 60);
  for (int t = 0; t < trials; ++t) {
    full_model_grad_trial(tiny_pmffnn_config(), 3000 + t, &worst_rel);
    full_model_grad_trial(tiny_deep_config(), 4000 + t, &worst_rel);
    full_model_grad_trial(tiny_cnn_config(), 5000 + t, &worst_rel);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(seconds < 30.0);
  std::printf("[PASS] criterion 1: gradients match finite differences, worst model rel err "
              "%.2e, pmffnn size %lld params, %.1fs\n",
              worst_rel, probe_params, seconds);
}

TEST_CASE("criterion 2: hand-computed forward oracle at 1e-10") {
  ArchConfig cfg;
  cfg.kind = ModelKind::PMFFNN;
  cfg.n_features = 2;
  cfg.n_outputs = 2;
  cfg.task = Task::Classification;
  cfg.groups = std::vector<std::vector<int>>{{0}, {1}};
  cfg.pathway = PathwayConfig{1, 0, 0.0, 1};
  cfg.head = HeadConfig{2, 0.0};
  ModelGraph model = ModelGraph::build(cfg, 1);

  const double w[2] = {0.7, -1.1}, b[2] = {0.1, 0.25};
  const double v[2] = {1.3, 0.8}, c[2] = {-0.2, 0.3};
  auto set = [&](const std::string& name, const Matrix2D& value) {
    for (auto& p : model.trainable_params()) {
      if (p.name == name) {
        *p.value = value;
        return;
      }
    }
    FAIL("missing parameter ", name);
  };
  for (int p = 0; p < 2; ++p) {
    const std::string prefix = "branch" + std::to_string(p);
    set(prefix + ".layer1.weight", Matrix2D(1, 1, w[p]));
    set(prefix + ".layer1.bias", Matrix2D(1, 1, b[p]));
    set(prefix + ".layer3.weight", Matrix2D(1, 1, v[p]));
    set(prefix + ".layer3.bias", Matrix2D(1, 1, c[p]));
  }
  const auto H = Matrix2D::from_rows({{0.5, -0.4}, {0.9, 0.2}});
  const auto hb = Matrix2D::from_rows({{0.05, -0.01}});
  const auto G = Matrix2D::from_rows({{1.0, -0.5}, {0.3, 0.7}});
  const auto gb = Matrix2D::from_rows({{0.02, 0.0}});
  set("head.layer0.weight", H);
  set("head.layer0.bias", hb);
  set("head.layer3.weight", G);
  set("head.layer3.bias", gb);

  const auto x = Matrix2D::from_rows({{0.6, -1.4}, {-0.3, 2.2}, {1.1, 0.4}});
  const Matrix2D got = model.forward(x, Mode::Inference);

  const double inv = 1.0 / std::sqrt(1.0 + 1e-5);
  auto selu = [](double t) {
    return t > 0 ? kSeluLambda * t : kSeluLambda * kSeluAlpha * std::expm1(t);
  };
  double worst = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double concat[2];
    for (int p = 0; p < 2; ++p) {
      double t = x(r, p) * inv;
      t = selu(w[p] * t + b[p]);
      t = 1.0 / (1.0 + std::exp(-(v[p] * t + c[p])));
      concat[p] = t * inv;
    }
    double hidden[2], logits[2];
    for (int j = 0; j < 2; ++j) {
      hidden[j] = (concat[0] * H(0, j) + concat[1] * H(1, j) + hb(0, j)) * inv;
    }
    for (int j = 0; j < 2; ++j) {
      logits[j] = hidden[0] * G(0, j) + hidden[1] * G(1, j) + gb(0, j);
    }
    const double peak = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - peak), e1 = std::exp(logits[1] - peak);
    worst = std::max(worst, std::abs(got(r, 0) - e0 / (e0 + e1)));
    worst = std::max(worst, std::abs(got(r, 1) - e1 / (e0 + e1)));
  }
  REQUIRE(worst < 1e-10);
  std::printf("[PASS] criterion 2: hand-computed forward oracle, max deviation %.2e\n", worst);
}

TEST_CASE("criterion 3: parameter-reduction identity and property") {
  // worked identity, independently recomputed
  const long long pathways_expected = 4LL * (16 * 32 + 32);
  const long long monolithic_expected = 64LL * 128 + 128;
  REQUIRE(pathways_expected == 2176);
  REQUIRE(monolithic_expected == 8320);

  ArchConfig cfg;
  cfg.kind = ModelKind::PMFFNN;
  cfg.n_features = 64;
  cfg.n_outputs = 4;
  cfg.task = Task::Classification;
  cfg.groups = 4;
  cfg.pathway.hidden_dim = 32;
  ModelGraph model = ModelGraph::build(cfg, 1);
  const ParamBreakdown pb = model.count_parameters();
  REQUIRE(pb.first_layer_pathways == pathways_expected);
  REQUIRE(pb.first_layer_monolithic == monolithic_expected);

  // cmd_describe agrees
  CliDir t;
  t.write("cfg.json", R"({
    "kind": "pmffnn", "n_features": 64, "n_outputs": 4,
    "task": "classification", "groups": 4
  })");
  std::string output;
  REQUIRE(t.run("describe --config cfg.json", &output) == 0);
  REQUIRE(output.find("2176") != std::string::npos);
  REQUIRE(output.find("8320") != std::string::npos);

  // reduction property over 50 random configs with d > P
  Rng rng(17);
  int checked = 0;
  while (checked < 50) {
    const int p = 2 + int(rng.next_below(7));
    const int d = p + 1 + int(rng.next_below(150));
    const int h = 1 + int(rng.next_below(64));
    ArchConfig rc;
    rc.kind = ModelKind::PMFFNN;
    rc.n_features = d;
    rc.n_outputs = 3;
    rc.task = Task::Classification;
    rc.groups = p;
    rc.pathway.hidden_dim = h;
    const ParamBreakdown rpb = ModelGraph::build(rc, 1).count_parameters();
    REQUIRE(rpb.first_layer_pathways < rpb.first_layer_monolithic);
    ++checked;
  }
  std::printf("[PASS] criterion 3: first-layer identity 2176 vs 8320 and the reduction "
              "property on %d random configs\n",
              checked);
}

TEST_CASE("criterion 4: parallel execution equivalence") {
  // library level: gradients bitwise identical across thread counts
  ArchConfig cfg;
  cfg.kind = ModelKind::PMFFNN;
  cfg.n_features = 16;
  cfg.n_outputs = 3;
  cfg.task = Task::Classification;
  cfg.groups = 4;
  cfg.include_full_pathway = true;
  ModelGraph seq = ModelGraph::build(cfg, 5);
  ModelGraph par = ModelGraph::build(cfg, 5);
  seq.set_threads(1);
  par.set_threads(4);
  const Matrix2D x = Rng(6).normal_matrix(8, 16, 0.0, 1.0);
  const Matrix2D up = Rng(7).normal_matrix(8, 3, 0.0, 0.1);
  const Matrix2D ys = seq.forward(x, Mode::Training);
  const Matrix2D yp = par.forward(x, Mode::Training);
  REQUIRE(max_abs_diff(ys, yp) == 0.0);
  seq.backward(up);
  par.backward(up);
  const auto gs = seq.trainable_params();
  const auto gp = par.trainable_params();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    REQUIRE(max_abs_diff(*gs[i].grad, *gp[i].grad) == 0.0);
  }

  // CLI level: byte-identical manifests, models, and eval outputs
  CliDir a, b;
  a.write("cfg.json", kSynthConfig);
  b.write("cfg.json", kSynthConfig);
  const std::string synth = "rows=600,features=64,groups=4,classes=4";
  const std::string train =
      "train --config cfg.json --synth " + synth + " --seed 3 --epochs 3 --out run --threads ";
  REQUIRE(a.run(train + "1") == 0);
  REQUIRE(b.run(train + "4") == 0);
  REQUIRE(a.read("run.manifest.json") == b.read("run.manifest.json"));
  REQUIRE(a.read("run.model.bin") == b.read("run.model.bin"));
  const std::string eval_cmd = "eval --config cfg.json --model run.model.bin --synth " + synth +
                               " --seed 3 --out eval.json --threads ";
  REQUIRE(a.run(eval_cmd + "1") == 0);
  REQUIRE(b.run(eval_cmd + "4") == 0);
  REQUIRE(a.read("eval.json") == b.read("eval.json"));
  std::printf("[PASS] criterion 4: --threads 1 vs 4 bitwise-identical losses, gradients, "
              "models, and eval reports\n");
}

TEST_CASE("criterion 5: synthetic experiment reaches the frozen accuracy and every group matters") {
  const auto t0 = std::chrono::steady_clock::now();
  // Frozen from the oracle run: seed 2024, noise 0, 3500/500 split. The
  // trajectory crosses 0.90 test accuracy by epoch 30 (observed 0.9220 at
  // 30 and 0.9240 at 40 under this exact chunk seeding).
  const std::uint64_t seed = 2024;
  const double accuracy_threshold = 0.90;
  const int rows = 4000, feats = 64, groups = 4, classes = 4;

  const DatasetTable full = synth_blockwise(rows, feats, groups, classes, 0.0, seed);
  const SplitResult split = train_test_split(full, 0.125, seed + 1);
  const StandardizeResult std_r = standardize(split.train, split.test);

  ArchConfig cfg;
  cfg.kind = ModelKind::PMFFNN;
  cfg.n_features = feats;
  cfg.n_outputs = classes;
  cfg.task = Task::Classification;
  cfg.groups = groups;
  ModelGraph model = ModelGraph::build(cfg, seed);

  TrainConfig tc;
  tc.batch_size = 32;
  double best = 0.0;
  int epochs_used = 0;
  for (int chunk = 0; chunk < 10 && best < accuracy_threshold; ++chunk) {
    tc.epochs = 10;
    tc.seed = seed * 131 + chunk;
    fit(model, std_r.train, tc);
    epochs_used += 10;
    best = std::max(best, accuracy_on(model, std_r.applied));
  }
  REQUIRE(epochs_used <= 100);
  REQUIRE(best >= accuracy_threshold);

  // Every group carries indispensable signal. With zero score noise the
  // full-information rule reproduces the labels exactly; the best
  // attainable rule without one group marginalizes the hidden aggregate
  // (Monte Carlo posterior argmax) and lands far below it.
  const SynthModel sm = synth_blockwise_model(feats, groups, classes, seed);
  Rng mc(999);
  const int n_mc = 256;
  std::vector<double> eps(n_mc);
  for (int i = 0; i < n_mc; ++i) eps[i] = mc.normal();

  const double masked_ceiling = 0.85;  // observed masked-Bayes accuracies: 0.71 - 0.82
  double worst_masked = 0.0;
  for (int masked = 0; masked < groups; ++masked) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < full.n_rows(); ++r) {
      double mu[4] = {0, 0, 0, 0};
      for (int k = 0; k < classes; ++k) {
        for (int g = 0; g < groups; ++g) {
          if (g == masked) continue;
          double sum = 0.0;
          for (int c : sm.groups[g]) sum += full.features(r, c);
          mu[k] += sm.class_weights(k, g) * (sum / std::sqrt(double(sm.groups[g].size())));
        }
      }
      int votes[4] = {0, 0, 0, 0};
      for (int i = 0; i < n_mc; ++i) {
        int best_k = 0;
        double best_s = -1e300;
        for (int k = 0; k < classes; ++k) {
          const double s = mu[k] + sm.class_weights(k, masked) * eps[i];
          if (s > best_s) {
            best_s = s;
            best_k = k;
          }
        }
        ++votes[best_k];
      }
      int best_k = 0;
      for (int k = 1; k < classes; ++k) {
        if (votes[k] > votes[best_k]) best_k = k;
      }
      if (best_k == full.labels[r]) ++hits;
    }
    const double masked_acc = double(hits) / double(full.n_rows());
    worst_masked = std::max(worst_masked, masked_acc);
    REQUIRE(masked_acc < masked_ceiling);
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(seconds < 300.0);
  std::printf("[PASS] criterion 5: test accuracy %.4f within %d epochs (threshold %.2f); "
              "best masked-group rule peaks at %.4f vs 1.0 full-information; %.1fs\n",
              best, epochs_used, accuracy_threshold, worst_masked, seconds);
}

TEST_CASE("criterion 6: baseline parity harness renders the three-model table") {
  const DatasetTable data = synth_blockwise(600, 16, 4, 3, 0.05, 11);
  const SplitResult split = train_test_split(data, 0.25, 12);
  const StandardizeResult std_r = standardize(split.train, split.test);

  TrainConfig tc;
  tc.epochs = 15;
  tc.batch_size = 32;
  tc.seed = 13;  // identical training configuration for all three models

  std::vector<std::string> names;
  std::vector<MetricsReport> reports;
  for (ModelKind kind : {ModelKind::PMFFNN, ModelKind::DeepFFNN, ModelKind::CNN1D}) {
    ArchConfig cfg;
    cfg.kind = kind;
    cfg.n_features = 16;
    cfg.n_outputs = 3;
    cfg.task = Task::Classification;
    if (kind == ModelKind::PMFFNN) cfg.groups = 4;
    if (kind == ModelKind::CNN1D) cfg.conv = ConvConfig{3, 6, 1};
    ModelGraph model = ModelGraph::build(cfg, 14);
    fit(model, std_r.train, tc);

    const Matrix2D out = model.forward(std_r.applied.features, Mode::Inference);
    std::vector<int> pred(out.rows());
    for (std::size_t r = 0; r < out.rows(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < out.cols(); ++c) {
        if (out(r, c) > out(r, best)) best = c;
      }
      pred[r] = int(best);
    }
    reports.push_back(classification_metrics(confusion(std_r.applied.labels, pred, 3)));
    names.push_back(model_kind_name(kind));
    for (const auto& [metric, value] : reports.back().values) {
      REQUIRE(std::isfinite(value));
      REQUIRE(value >= 0.0);
      REQUIRE(value <= 1.0);
    }
  }

  const std::string table = render_metrics_table(names, reports);
  for (const char* needle :
       {"Metric", "pmffnn", "deep_ffnn", "cnn1d", "Accuracy", "Precision", "Recall", "F1-Score"}) {
    REQUIRE(table.find(needle) != std::string::npos);
  }
  std::printf("[PASS] criterion 6: pmffnn/deep_ffnn/cnn1d trained under one config; table:\n%s",
              table.c_str());
}

TEST_CASE("criterion 7: end-to-end determinism of train + eval") {
  CliDir a, b;
  a.write("cfg.json", kSynthConfig);
  b.write("cfg.json", kSynthConfig);
  const std::string synth = "rows=500,features=64,groups=4,classes=4";
  const std::string train_cmd =
      "train --config cfg.json --synth " + synth + " --seed 21 --epochs 4 --out run";
  const std::string eval_cmd =
      "eval --config cfg.json --model run.model.bin --synth " + synth +
      " --seed 21 --out eval.json";
  REQUIRE(a.run(train_cmd) == 0);
  REQUIRE(a.run(eval_cmd) == 0);
  REQUIRE(b.run(train_cmd) == 0);
  REQUIRE(b.run(eval_cmd) == 0);
  REQUIRE(a.read("run.manifest.json") == b.read("run.manifest.json"));
  REQUIRE(a.read("run.model.bin") == b.read("run.model.bin"));
  REQUIRE(a.read("eval.json") == b.read("eval.json"));
  REQUIRE(a.read("run.manifest.json").size() > 0);
  std::printf("[PASS] criterion 7: two identical train+eval runs, byte-identical manifests\n");
}

TEST_CASE("criterion 8: metric oracles and softmax normalization") {
  Rng rng(23);

  // classification metrics against brute-force confusion counting
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + int(rng.next_below(6));
    const int n = 1 + int(rng.next_below(60));
    std::vector<int> truth, pred;
    for (int i = 0; i < n; ++i) {
      truth.push_back(int(rng.next_below(k)));
      pred.push_back(int(rng.next_below(k)));
    }
    long long brute[8][8] = {};
    std::size_t hits = 0;
    for (int i = 0; i < n; ++i) {
      ++brute[truth[i]][pred[i]];
      if (truth[i] == pred[i]) ++hits;
    }
    const ConfusionMatrix cm = confusion(truth, pred, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) REQUIRE(cm.at(i, j) == brute[i][j]);
    }
    const MetricsReport r = classification_metrics(cm);
    REQUIRE(*r.get("Accuracy") == doctest::Approx(double(hits) / n).epsilon(1e-12));
  }

  // RMSE >= MAE on 1000 random regression vectors
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_below(40);
    const Matrix2D pred = rng.normal_matrix(n, 1, 0.0, 2.0);
    const Matrix2D target = rng.normal_matrix(n, 1, 0.3, 1.5);
    const MetricsReport r = regression_metrics(pred, target);
    REQUIRE(*r.get("RMSE") >= *r.get("MAE") - 1e-12);
  }

  // softmax rows sum to 1 within 1e-12 on real model outputs
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ArchConfig cfg;
    cfg.kind = ModelKind::PMFFNN;
    cfg.n_features = 10;
    cfg.n_outputs = 2 + int(seed);
    cfg.task = Task::Classification;
    cfg.groups = 2;
    ModelGraph model = ModelGraph::build(cfg, seed);
    const Matrix2D out = model.forward(Rng(seed).normal_matrix(6, 10, 0.0, 2.0), Mode::Inference);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < out.cols(); ++c) sum += out(r, c);
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }
  }
  std::printf("[PASS] criterion 8: metric oracles on 1000 random vectors and softmax "
              "normalization on model outputs\n");
}
