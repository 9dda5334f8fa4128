#include "pmffnn/layers.hpp"

#include <cmath>

#include "pmffnn/errors.hpp"

namespace pmffnn {

LayerSpec LayerSpec::dense(int in_dim, int out_dim) {
  if (in_dim < 1 || out_dim < 1) {
    throw DomainError("dense: dimensions must be >= 1, got " + std::to_string(in_dim) + "->" +
                      std::to_string(out_dim));
  }
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in_dim = in_dim;
  s.out_dim = out_dim;
  return s;
}

LayerSpec LayerSpec::batch_norm(int dim) {
  if (dim < 1) throw DomainError("batch_norm: dim must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::BatchNorm;
  s.in_dim = dim;
  s.out_dim = dim;
  return s;
}

LayerSpec LayerSpec::dropout(int dim, double rate) {
  if (dim < 1) throw DomainError("dropout: dim must be >= 1");
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw DomainError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.in_dim = dim;
  s.out_dim = dim;
  s.dropout_rate = rate;
  return s;
}

LayerSpec LayerSpec::act(ActivationKind kind, int dim) {
  if (dim < 1) throw DomainError("activation: dim must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::Activation;
  s.in_dim = dim;
  s.out_dim = dim;
  s.activation = kind;
  return s;
}

LayerSpec LayerSpec::conv1d(int length, int in_channels, int kernel_size, int out_channels) {
  if (length < 1 || in_channels < 1 || out_channels < 1) {
    throw DomainError("conv1d: sizes must be >= 1");
  }
  if (kernel_size < 1 || kernel_size > length) {
    throw ShapeError("conv1d: kernel size " + std::to_string(kernel_size) +
                     " does not fit feature axis of length " + std::to_string(length));
  }
  LayerSpec s;
  s.kind = LayerKind::Conv1D;
  s.kernel_size = kernel_size;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.in_dim = in_channels * length;
  s.out_dim = out_channels * (length - kernel_size + 1);
  return s;
}

long long param_count(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Dense:
      return static_cast<long long>(spec.in_dim) * spec.out_dim + spec.out_dim;
    case LayerKind::BatchNorm:
      // gamma + beta; running stats are buffers, not trainable.
      return 2LL * spec.in_dim;
    case LayerKind::Dropout:
    case LayerKind::Activation:
      return 0;
    case LayerKind::Conv1D:
      return static_cast<long long>(spec.kernel_size) * spec.in_channels * spec.out_channels +
             spec.out_channels;
  }
  return 0;
}

void Layer::zero_grads() {
  for (auto& p : trainable_params()) {
    if (p.grad) p.grad->flat().assign(p.grad->size(), 0.0);
  }
}

namespace {

void check_input_cols(const LayerSpec& spec, const Matrix2D& x, const char* what) {
  if (static_cast<int>(x.cols()) != spec.in_dim) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(spec.in_dim) +
                     " input columns, got " + x.shape_str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(int in_dim, int out_dim, Rng& init_rng)
    : Layer(LayerSpec::dense(in_dim, out_dim)),
      weight_(init_rng.normal_matrix(in_dim, out_dim, 0.0, 1.0 / std::sqrt(double(in_dim)))),
      bias_(1, out_dim),
      grad_weight_(in_dim, out_dim),
      grad_bias_(1, out_dim) {}

Matrix2D DenseLayer::forward(const Matrix2D& x, Mode, Rng&) {
  check_input_cols(spec_, x, "dense_forward");
  cached_input_ = x;
  Matrix2D y = matmul(x, weight_);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bias_(0, c);
  }
  return y;
}

Matrix2D DenseLayer::backward(const Matrix2D& upstream) {
  if (!cached_input_) throw StateError("dense backward without a cached forward");
  const Matrix2D& x = *cached_input_;
  if (upstream.rows() != x.rows() || static_cast<int>(upstream.cols()) != spec_.out_dim) {
    throw ShapeError("dense backward: upstream " + upstream.shape_str() + " does not match output");
  }
  const Matrix2D dw = matmul(transpose(x), upstream);
  for (std::size_t i = 0; i < dw.size(); ++i) grad_weight_.flat()[i] += dw.flat()[i];
  const Matrix2D db = colsum(upstream);
  for (std::size_t i = 0; i < db.size(); ++i) grad_bias_.flat()[i] += db.flat()[i];
  return matmul(upstream, transpose(weight_));
}

std::vector<ParamRef> DenseLayer::trainable_params() {
  return {{"weight", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
}

// ---------------------------------------------------------------------------
// BatchNorm
// ---------------------------------------------------------------------------

BatchNormLayer::BatchNormLayer(int dim, double epsilon, double momentum)
    : Layer(LayerSpec::batch_norm(dim)),
      epsilon_(epsilon),
      momentum_(momentum),
      gamma_(1, dim, 1.0),
      beta_(1, dim),
      running_mean_(1, dim, 0.0),
      running_var_(1, dim, 1.0),
      grad_gamma_(1, dim),
      grad_beta_(1, dim),
      cached_inv_std_(1, dim) {}

Matrix2D BatchNormLayer::forward(const Matrix2D& x, Mode mode, Rng&) {
  check_input_cols(spec_, x, "batchnorm_forward");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix2D mean(1, d), var(1, d);
  if (mode == Mode::Training) {
    if (n < 2) {
      throw DomainError("batchnorm: training mode needs at least 2 rows, got " + x.shape_str());
    }
    const ColumnMoments mom = column_moments(x);
    mean = mom.mean;
    var = mom.variance;
    // new_running = (1 - momentum) * running + momentum * batch_stat
    for (std::size_t c = 0; c < d; ++c) {
      running_mean_(0, c) = (1.0 - momentum_) * running_mean_(0, c) + momentum_ * mean(0, c);
      running_var_(0, c) = (1.0 - momentum_) * running_var_(0, c) + momentum_ * var(0, c);
    }
  } else {
    mean = running_mean_;
    var = running_var_;
  }

  Matrix2D xhat(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    const double inv_std = 1.0 / std::sqrt(var(0, c) + epsilon_);
    cached_inv_std_(0, c) = inv_std;
    for (std::size_t r = 0; r < n; ++r) xhat(r, c) = (x(r, c) - mean(0, c)) * inv_std;
  }
  cached_xhat_ = xhat;
  cached_mode_ = mode;

  Matrix2D y(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) y(r, c) = gamma_(0, c) * xhat(r, c) + beta_(0, c);
  }
  return y;
}

Matrix2D BatchNormLayer::backward(const Matrix2D& upstream) {
  if (!cached_xhat_) throw StateError("batchnorm backward without a cached forward");
  const Matrix2D& xhat = *cached_xhat_;
  if (!upstream.same_shape(xhat)) {
    throw ShapeError("batchnorm backward: upstream " + upstream.shape_str() +
                     " does not match output " + xhat.shape_str());
  }
  const std::size_t n = xhat.rows();
  const std::size_t d = xhat.cols();

  for (std::size_t c = 0; c < d; ++c) {
    double dg = 0.0, db = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      dg += upstream(r, c) * xhat(r, c);
      db += upstream(r, c);
    }
    grad_gamma_(0, c) += dg;
    grad_beta_(0, c) += db;
  }

  Matrix2D dx(n, d);
  if (cached_mode_ == Mode::Inference) {
    // Running stats are constants here.
    for (std::size_t c = 0; c < d; ++c) {
      const double k = gamma_(0, c) * cached_inv_std_(0, c);
      for (std::size_t r = 0; r < n; ++r) dx(r, c) = upstream(r, c) * k;
    }
    return dx;
  }

  // Training mode: full derivative through the batch mean and (biased)
  // variance. With dxhat = dy * gamma:
  //   dx = inv_std/N * (N*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
  for (std::size_t c = 0; c < d; ++c) {
    const double g = gamma_(0, c);
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dxhat = upstream(r, c) * g;
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat(r, c);
    }
    const double scale = cached_inv_std_(0, c) / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double dxhat = upstream(r, c) * g;
      dx(r, c) = scale * (static_cast<double>(n) * dxhat - sum_dxhat - xhat(r, c) * sum_dxhat_xhat);
    }
  }
  return dx;
}

std::vector<ParamRef> BatchNormLayer::trainable_params() {
  return {{"gamma", &gamma_, &grad_gamma_}, {"beta", &beta_, &grad_beta_}};
}

std::vector<ParamRef> BatchNormLayer::buffers() {
  return {{"running_mean", &running_mean_, nullptr}, {"running_var", &running_var_, nullptr}};
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

DropoutLayer::DropoutLayer(int dim, double rate) : Layer(LayerSpec::dropout(dim, rate)) {}

Matrix2D DropoutLayer::forward(const Matrix2D& x, Mode mode, Rng& rng) {
  check_input_cols(spec_, x, "dropout_forward");
  const double rate = spec_.dropout_rate;
  if (mode == Mode::Inference || rate == 0.0) {
    mask_ = Matrix2D(x.rows(), x.cols(), 1.0);
    return x;
  }
  // Inverted dropout: kept entries are scaled by 1/(1-rate) so the
  // inference path is the identity.
  const double scale = 1.0 / (1.0 - rate);
  Matrix2D mask(x.rows(), x.cols());
  Matrix2D y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool keep = rng.uniform01() >= rate;
    mask.flat()[i] = keep ? scale : 0.0;
    y.flat()[i] = x.flat()[i] * mask.flat()[i];
  }
  mask_ = std::move(mask);
  return y;
}

Matrix2D DropoutLayer::backward(const Matrix2D& upstream) {
  if (!mask_) throw StateError("dropout backward without a cached forward");
  if (!upstream.same_shape(*mask_)) {
    throw ShapeError("dropout backward: upstream " + upstream.shape_str() +
                     " does not match mask " + mask_->shape_str());
  }
  Matrix2D dx(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < dx.size(); ++i) dx.flat()[i] = upstream.flat()[i] * mask_->flat()[i];
  return dx;
}

const Matrix2D& DropoutLayer::last_mask() const {
  if (!mask_) throw StateError("dropout mask requested before any forward");
  return *mask_;
}

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

Matrix2D softmax_rows(const Matrix2D& logits) {
  Matrix2D y(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double row_max = logits(r, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) row_max = std::max(row_max, logits(r, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      y(r, c) = std::exp(logits(r, c) - row_max);
      denom += y(r, c);
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) y(r, c) /= denom;
  }
  return y;
}

ActivationLayer::ActivationLayer(ActivationKind kind, int dim) : Layer(LayerSpec::act(kind, dim)) {}

Matrix2D ActivationLayer::forward(const Matrix2D& x, Mode, Rng&) {
  check_input_cols(spec_, x, "activation_forward");
  Matrix2D y(x.rows(), x.cols());
  switch (spec_.activation) {
    case ActivationKind::Selu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.flat()[i];
        y.flat()[i] = v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * std::expm1(v);
      }
      cached_input_ = x;
      break;
    case ActivationKind::Relu:
      for (std::size_t i = 0; i < x.size(); ++i) y.flat()[i] = std::max(0.0, x.flat()[i]);
      cached_input_ = x;
      break;
    case ActivationKind::Sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) y.flat()[i] = 1.0 / (1.0 + std::exp(-x.flat()[i]));
      cached_output_ = y;
      break;
    case ActivationKind::Softmax:
      y = softmax_rows(x);
      cached_output_ = y;
      break;
  }
  return y;
}

Matrix2D ActivationLayer::backward(const Matrix2D& upstream) {
  Matrix2D dx(upstream.rows(), upstream.cols());
  switch (spec_.activation) {
    case ActivationKind::Selu: {
      if (!cached_input_) throw StateError("selu backward without a cached forward");
      const Matrix2D& x = *cached_input_;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.flat()[i];
        const double d = v > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(v);
        dx.flat()[i] = upstream.flat()[i] * d;
      }
      break;
    }
    case ActivationKind::Relu: {
      if (!cached_input_) throw StateError("relu backward without a cached forward");
      const Matrix2D& x = *cached_input_;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dx.flat()[i] = x.flat()[i] > 0.0 ? upstream.flat()[i] : 0.0;
      }
      break;
    }
    case ActivationKind::Sigmoid: {
      if (!cached_output_) throw StateError("sigmoid backward without a cached forward");
      const Matrix2D& y = *cached_output_;
      for (std::size_t i = 0; i < y.size(); ++i) {
        dx.flat()[i] = upstream.flat()[i] * y.flat()[i] * (1.0 - y.flat()[i]);
      }
      break;
    }
    case ActivationKind::Softmax: {
      // Full Jacobian per row: dx_i = y_i * (dy_i - sum_j dy_j y_j).
      // The fused cross-entropy path bypasses this (see the training module).
      if (!cached_output_) throw StateError("softmax backward without a cached forward");
      const Matrix2D& y = *cached_output_;
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) dot += upstream(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) {
          dx(r, c) = y(r, c) * (upstream(r, c) - dot);
        }
      }
      break;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Conv1D
// ---------------------------------------------------------------------------

Conv1DLayer::Conv1DLayer(int length, int in_channels, int kernel_size, int out_channels,
                         Rng& init_rng)
    : Layer(LayerSpec::conv1d(length, in_channels, kernel_size, out_channels)),
      length_(length),
      out_length_(length - kernel_size + 1),
      kernels_(init_rng.normal_matrix(std::size_t(in_channels) * kernel_size, out_channels, 0.0,
                                      1.0 / std::sqrt(double(in_channels) * kernel_size))),
      bias_(1, out_channels),
      grad_kernels_(std::size_t(in_channels) * kernel_size, out_channels),
      grad_bias_(1, out_channels) {}

Matrix2D Conv1DLayer::forward(const Matrix2D& x, Mode, Rng&) {
  check_input_cols(spec_, x, "conv1d_forward");
  cached_input_ = x;
  const int k = spec_.kernel_size;
  const int ci = spec_.in_channels;
  const int co = spec_.out_channels;
  Matrix2D y(x.rows(), std::size_t(co) * out_length_);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    for (int oc = 0; oc < co; ++oc) {
      for (int p = 0; p < out_length_; ++p) {
        double acc = bias_(0, oc);
        for (int ic = 0; ic < ci; ++ic) {
          for (int t = 0; t < k; ++t) {
            acc += x(b, std::size_t(ic) * length_ + p + t) * kernels_(std::size_t(ic) * k + t, oc);
          }
        }
        y(b, std::size_t(oc) * out_length_ + p) = acc;
      }
    }
  }
  return y;
}

Matrix2D Conv1DLayer::backward(const Matrix2D& upstream) {
  if (!cached_input_) throw StateError("conv1d backward without a cached forward");
  const Matrix2D& x = *cached_input_;
  if (upstream.rows() != x.rows() || static_cast<int>(upstream.cols()) != spec_.out_dim) {
    throw ShapeError("conv1d backward: upstream " + upstream.shape_str() +
                     " does not match output");
  }
  const int k = spec_.kernel_size;
  const int ci = spec_.in_channels;
  const int co = spec_.out_channels;

  Matrix2D dx(x.rows(), x.cols());
  for (std::size_t b = 0; b < x.rows(); ++b) {
    for (int oc = 0; oc < co; ++oc) {
      for (int p = 0; p < out_length_; ++p) {
        const double up = upstream(b, std::size_t(oc) * out_length_ + p);
        grad_bias_(0, oc) += up;
        for (int ic = 0; ic < ci; ++ic) {
          for (int t = 0; t < k; ++t) {
            grad_kernels_(std::size_t(ic) * k + t, oc) +=
                up * x(b, std::size_t(ic) * length_ + p + t);
            dx(b, std::size_t(ic) * length_ + p + t) +=
                up * kernels_(std::size_t(ic) * k + t, oc);
          }
        }
      }
    }
  }
  return dx;
}

std::vector<ParamRef> Conv1DLayer::trainable_params() {
  return {{"kernels", &kernels_, &grad_kernels_}, {"bias", &bias_, &grad_bias_}};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Rng& init_rng) {
  switch (spec.kind) {
    case LayerKind::Dense:
      return std::make_unique<DenseLayer>(spec.in_dim, spec.out_dim, init_rng);
    case LayerKind::BatchNorm:
      return std::make_unique<BatchNormLayer>(spec.in_dim);
    case LayerKind::Dropout:
      return std::make_unique<DropoutLayer>(spec.in_dim, spec.dropout_rate);
    case LayerKind::Activation:
      return std::make_unique<ActivationLayer>(spec.activation, spec.in_dim);
    case LayerKind::Conv1D:
      return std::make_unique<Conv1DLayer>(spec.in_dim / spec.in_channels, spec.in_channels,
                                           spec.kernel_size, spec.out_channels, init_rng);
  }
  throw DomainError("make_layer: unknown layer kind");
}

}  // namespace pmffnn
