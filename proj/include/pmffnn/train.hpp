#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pmffnn/data.hpp"
#include "pmffnn/matrix.hpp"
#include "pmffnn/model.hpp"

namespace pmffnn {

enum class OptimizerKind { SGD, Adam };
enum class LossKind { CrossEntropy, MSE };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD only
  double beta1 = 0.9;     // Adam
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
  LossKind loss = LossKind::CrossEntropy;
};

struct LossGrad {
  double loss = 0.0;
  Matrix2D grad;
};

/// Mean negative log-likelihood with probabilities clamped to [1e-12, 1].
/// The returned gradient is w.r.t. the pre-softmax logits (fused form):
/// (probs - one_hot) / batch. Feed it to ModelGraph::backward with
/// upstream_at_logits = true.
LossGrad cross_entropy(const Matrix2D& probs, const std::vector<int>& labels);

/// Mean squared error over all entries; grad = 2 (pred - target) / n.
LossGrad mse(const Matrix2D& pred, const Matrix2D& target);

/// SGD with momentum (v <- momentum*v - lr*g; p <- p + v) or Adam with
/// bias correction. Slot state is keyed by position in the params list.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const std::vector<ParamRef>& params);
  void step(const std::vector<ParamRef>& params);

 private:
  TrainConfig cfg_;
  long long step_count_ = 0;
  std::vector<Matrix2D> slot_a_;  // SGD velocity / Adam first moment
  std::vector<Matrix2D> slot_b_;  // Adam second moment
};

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_metric;  // accuracy or negative mse
  double seconds = 0.0;              // wall clock, excluded from manifests
};

struct FitReport {
  std::vector<EpochStats> epochs;
};

/// Deterministic row order for one epoch; a dedicated stream, so model
/// architecture (and its dropout draws) can never perturb batch order.
std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed,
                                             std::uint64_t epoch);

using EpochCallback = std::function<void(int epoch, const EpochStats& stats)>;

/// Mini-batch training loop. Dropout streams are re-derived from
/// cfg.seed, so identical (model init, data, config) runs produce
/// identical loss sequences. The model is left in inference mode. A final
/// mini-batch smaller than 2 is dropped when the model contains
/// BatchNorm. Throws DivergenceError on a non-finite loss.
FitReport fit(ModelGraph& model, const DatasetTable& data, const TrainConfig& cfg,
              const DatasetTable* validation = nullptr, const EpochCallback& on_epoch = {});

}  // namespace pmffnn
