#include "pmffnn/train.hpp"

#include <chrono>
#include <cmath>

#include "pmffnn/errors.hpp"

namespace pmffnn {

namespace {

constexpr std::uint64_t kShuffleTag = 7001;
constexpr std::uint64_t kDropoutReseedTag = 7002;

constexpr double kProbFloor = 1e-12;

Matrix2D gather_rows(const Matrix2D& x, const std::vector<std::size_t>& order, std::size_t begin,
                     std::size_t end) {
  Matrix2D out(end - begin, x.cols());
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(i - begin, c) = x(order[i], c);
  }
  return out;
}

}  // namespace

LossGrad cross_entropy(const Matrix2D& probs, const std::vector<int>& labels) {
  if (probs.rows() != labels.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     probs.shape_str() + " probabilities");
  }
  const std::size_t n = probs.rows();
  const std::size_t k = probs.cols();
  LossGrad out;
  out.grad = Matrix2D(n, k);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw DomainError("cross_entropy: label " + std::to_string(label) + " out of range [0, " +
                        std::to_string(k) + ")");
    }
    const double p = std::min(1.0, std::max(kProbFloor, probs(r, static_cast<std::size_t>(label))));
    total -= std::log(p);
    for (std::size_t c = 0; c < k; ++c) {
      const double one_hot = (static_cast<std::size_t>(label) == c) ? 1.0 : 0.0;
      out.grad(r, c) = (probs(r, c) - one_hot) / static_cast<double>(n);
    }
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

LossGrad mse(const Matrix2D& pred, const Matrix2D& target) {
  if (!pred.same_shape(target)) {
    throw ShapeError("mse: shapes disagree, " + pred.shape_str() + " vs " + target.shape_str());
  }
  const double n = static_cast<double>(pred.size());
  LossGrad out;
  out.grad = Matrix2D(pred.rows(), pred.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred.flat()[i] - target.flat()[i];
    total += e * e;
    out.grad.flat()[i] = 2.0 * e / n;
  }
  out.loss = total / n;
  return out;
}

Optimizer::Optimizer(const TrainConfig& cfg, const std::vector<ParamRef>& params) : cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw ConfigError("lr", "must be > 0");
  slot_a_.reserve(params.size());
  for (const auto& p : params) slot_a_.emplace_back(p.value->rows(), p.value->cols());
  if (cfg.optimizer == OptimizerKind::Adam) {
    slot_b_.reserve(params.size());
    for (const auto& p : params) slot_b_.emplace_back(p.value->rows(), p.value->cols());
  }
}

void Optimizer::step(const std::vector<ParamRef>& params) {
  if (params.size() != slot_a_.size()) {
    throw ShapeError("optimizer: parameter list changed size");
  }
  ++step_count_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix2D& value = *params[i].value;
    const Matrix2D& grad = *params[i].grad;
    if (!value.same_shape(grad) || !value.same_shape(slot_a_[i])) {
      throw ShapeError("optimizer: shape mismatch on parameter " + params[i].name);
    }
    if (cfg_.optimizer == OptimizerKind::SGD) {
      Matrix2D& velocity = slot_a_[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        velocity.flat()[j] = cfg_.momentum * velocity.flat()[j] - cfg_.lr * grad.flat()[j];
        value.flat()[j] += velocity.flat()[j];
      }
    } else {
      Matrix2D& m = slot_a_[i];
      Matrix2D& v = slot_b_[i];
      const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
      const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad.flat()[j];
        m.flat()[j] = cfg_.beta1 * m.flat()[j] + (1.0 - cfg_.beta1) * g;
        v.flat()[j] = cfg_.beta2 * v.flat()[j] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m.flat()[j] / bc1;
        const double v_hat = v.flat()[j] / bc2;
        value.flat()[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.adam_eps);
      }
    }
  }
}

std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed,
                                             std::uint64_t epoch) {
  Rng rng = Rng(seed).derive(kShuffleTag).derive(epoch);
  return shuffled_indices(n, rng);
}

namespace {

double evaluate_loss(ModelGraph& model, const DatasetTable& data, LossKind loss) {
  const Matrix2D out = model.forward(data.features, Mode::Inference);
  if (loss == LossKind::CrossEntropy) return cross_entropy(out, data.labels).loss;
  return mse(out, data.targets).loss;
}

double evaluate_metric(ModelGraph& model, const DatasetTable& data, LossKind loss) {
  const Matrix2D out = model.forward(data.features, Mode::Inference);
  if (loss == LossKind::CrossEntropy) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < out.cols(); ++c) {
        if (out(r, c) > out(r, best)) best = c;
      }
      if (static_cast<int>(best) == data.labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(out.rows());
  }
  return -mse(out, data.targets).loss;
}

}  // namespace

FitReport fit(ModelGraph& model, const DatasetTable& data, const TrainConfig& cfg,
              const DatasetTable* validation, const EpochCallback& on_epoch) {
  if (static_cast<int>(data.features.cols()) != model.n_features()) {
    throw ShapeError("fit: data has " + std::to_string(data.features.cols()) +
                     " features, model expects " + std::to_string(model.n_features()));
  }
  if (cfg.epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  const bool has_bn = model.has_batchnorm();
  if (has_bn && cfg.batch_size < 2) {
    throw ConfigError("batch_size", "must be >= 2 when the model contains BatchNorm");
  }
  if (cfg.loss == LossKind::CrossEntropy) {
    if (data.task != Task::Classification || data.labels.size() != data.n_rows()) {
      throw ConfigError("loss", "cross-entropy needs classification labels");
    }
    for (int label : data.labels) {
      if (label < 0 || label >= model.n_outputs()) {
        throw DomainError("fit: label " + std::to_string(label) + " out of range [0, " +
                          std::to_string(model.n_outputs()) + ")");
      }
    }
  } else if (static_cast<int>(data.targets.cols()) != model.n_outputs()) {
    throw ShapeError("fit: target dim " + std::to_string(data.targets.cols()) +
                     " does not match model outputs " + std::to_string(model.n_outputs()));
  }

  const std::size_t n = data.n_rows();
  if (n == 0) throw DomainError("fit: empty dataset");

  // Independent streams per concern: batch order never depends on the
  // architecture, dropout never depends on the shuffle.
  model.reseed_dropout_streams(Rng(cfg.seed).derive(kDropoutReseedTag).seed());

  Optimizer optimizer(cfg, model.trainable_params());
  const bool fused_ce = cfg.loss == LossKind::CrossEntropy && model.softmax_output();

  FitReport report;
  report.epochs.reserve(cfg.epochs);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.shuffle) {
      order = shuffle_permutation(n, cfg.seed, static_cast<std::uint64_t>(epoch));
    }

    double loss_sum = 0.0;
    std::size_t rows_seen = 0;
    auto params = model.trainable_params();
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const std::size_t batch_rows = end - begin;
      if (batch_rows < 2 && has_bn) break;  // degenerate tail batch

      const Matrix2D bx = gather_rows(data.features, order, begin, end);
      model.zero_grads();
      const Matrix2D out = model.forward(bx, Mode::Training);

      LossGrad lg;
      if (cfg.loss == LossKind::CrossEntropy) {
        std::vector<int> blabels(batch_rows);
        for (std::size_t i = begin; i < end; ++i) blabels[i - begin] = data.labels[order[i]];
        lg = cross_entropy(out, blabels);
      } else {
        lg = mse(out, gather_rows(data.targets, order, begin, end));
      }
      if (!std::isfinite(lg.loss)) {
        throw DivergenceError("fit: non-finite loss in epoch " + std::to_string(epoch + 1));
      }

      model.backward(lg.grad, fused_ce);
      optimizer.step(params);

      loss_sum += lg.loss * static_cast<double>(batch_rows);
      rows_seen += batch_rows;
    }
    if (rows_seen == 0) {
      throw ConfigError("batch_size", "no usable batches (dataset smaller than 2 rows?)");
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(rows_seen);
    if (validation) {
      stats.val_loss = evaluate_loss(model, *validation, cfg.loss);
      stats.val_metric = evaluate_metric(model, *validation, cfg.loss);
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(stats);
    if (on_epoch) on_epoch(epoch + 1, stats);
  }
  return report;
}

}  // namespace pmffnn
