#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmffnn/matrix.hpp"
#include "pmffnn/rng.hpp"

namespace pmffnn {

enum class Mode { Training, Inference };
enum class LayerKind { Dense, BatchNorm, Dropout, Activation, Conv1D };
enum class ActivationKind { Selu, Sigmoid, Softmax, Relu };

/// Self-normalizing SELU constants.
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Declarative layer description. make_layer() turns a spec into a live
/// layer with initialized parameters; param_count() gives the exact number
/// of trainable scalars it will carry.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in_dim = 0;   // Conv1D: in_channels * length
  int out_dim = 0;  // Conv1D: out_channels * (length - kernel_size + 1)
  ActivationKind activation = ActivationKind::Relu;
  double dropout_rate = 0.0;
  int kernel_size = 0;
  int in_channels = 1;
  int out_channels = 0;

  static LayerSpec dense(int in_dim, int out_dim);
  static LayerSpec batch_norm(int dim);
  static LayerSpec dropout(int dim, double rate);
  static LayerSpec act(ActivationKind kind, int dim);
  static LayerSpec conv1d(int length, int in_channels, int kernel_size, int out_channels);
};

long long param_count(const LayerSpec& spec);

/// Named handle onto a parameter matrix. grad is null for running-stat
/// buffers, which persist with the model but are not trained.
struct ParamRef {
  std::string name;
  Matrix2D* value = nullptr;
  Matrix2D* grad = nullptr;
};

class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(spec) {}
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }

  /// rng is consumed only by stochastic layers (Dropout in training mode).
  virtual Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) = 0;

  /// Returns the gradient w.r.t. the layer input and accumulates parameter
  /// gradients. StateError when no forward pass has populated the cache.
  virtual Matrix2D backward(const Matrix2D& upstream) = 0;

  virtual std::vector<ParamRef> trainable_params() { return {}; }
  virtual std::vector<ParamRef> buffers() { return {}; }

  void zero_grads();

 protected:
  LayerSpec spec_;
};

/// Initializes Dense/Conv1D weights LeCun-normal (stddev 1/sqrt(fan_in)),
/// biases zero, BatchNorm gamma 1 / beta 0 / running stats (0, 1).
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Rng& init_rng);

class DenseLayer : public Layer {
 public:
  DenseLayer(int in_dim, int out_dim, Rng& init_rng);

  Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) override;
  Matrix2D backward(const Matrix2D& upstream) override;
  std::vector<ParamRef> trainable_params() override;

  Matrix2D& weight() { return weight_; }
  Matrix2D& bias() { return bias_; }

 private:
  Matrix2D weight_;  // in x out
  Matrix2D bias_;    // 1 x out
  Matrix2D grad_weight_, grad_bias_;
  std::optional<Matrix2D> cached_input_;
};

class BatchNormLayer : public Layer {
 public:
  explicit BatchNormLayer(int dim, double epsilon = kBatchNormEpsilon,
                          double momentum = kBatchNormMomentum);

  Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) override;
  Matrix2D backward(const Matrix2D& upstream) override;
  std::vector<ParamRef> trainable_params() override;
  std::vector<ParamRef> buffers() override;

  Matrix2D& gamma() { return gamma_; }
  Matrix2D& beta() { return beta_; }
  const Matrix2D& running_mean() const { return running_mean_; }
  const Matrix2D& running_var() const { return running_var_; }

 private:
  double epsilon_;
  double momentum_;
  Matrix2D gamma_, beta_;                // 1 x dim
  Matrix2D running_mean_, running_var_;  // 1 x dim
  Matrix2D grad_gamma_, grad_beta_;
  // backward cache
  std::optional<Matrix2D> cached_xhat_;
  Matrix2D cached_inv_std_;  // 1 x dim
  Mode cached_mode_ = Mode::Training;
};

class DropoutLayer : public Layer {
 public:
  DropoutLayer(int dim, double rate);

  Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) override;
  Matrix2D backward(const Matrix2D& upstream) override;

  /// Scaled keep mask from the last forward: entries are 0 or 1/(1-rate),
  /// all-ones at inference.
  const Matrix2D& last_mask() const;

 private:
  std::optional<Matrix2D> mask_;
};

class ActivationLayer : public Layer {
 public:
  ActivationLayer(ActivationKind kind, int dim);

  Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) override;
  Matrix2D backward(const Matrix2D& upstream) override;

 private:
  // SELU/ReLU differentiate from the input, Sigmoid/Softmax from the output.
  std::optional<Matrix2D> cached_input_;
  std::optional<Matrix2D> cached_output_;
};

/// Valid (no-padding) cross-correlation along the feature axis, stride 1.
/// Columns hold channel-major blocks: channel c occupies the contiguous
/// column range [c*length, (c+1)*length).
class Conv1DLayer : public Layer {
 public:
  Conv1DLayer(int length, int in_channels, int kernel_size, int out_channels, Rng& init_rng);

  Matrix2D forward(const Matrix2D& x, Mode mode, Rng& rng) override;
  Matrix2D backward(const Matrix2D& upstream) override;
  std::vector<ParamRef> trainable_params() override;

  Matrix2D& kernels() { return kernels_; }
  Matrix2D& bias() { return bias_; }

 private:
  int length_;       // per-channel input length
  int out_length_;   // length - kernel_size + 1
  Matrix2D kernels_;  // (in_channels * kernel_size) x out_channels
  Matrix2D bias_;     // 1 x out_channels
  Matrix2D grad_kernels_, grad_bias_;
  std::optional<Matrix2D> cached_input_;
};

/// Row-wise softmax with max-subtraction, exposed for losses and tests.
Matrix2D softmax_rows(const Matrix2D& logits);

}  // namespace pmffnn
