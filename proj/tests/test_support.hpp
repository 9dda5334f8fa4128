#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pmffnn/layers.hpp"
#include "pmffnn/matrix.hpp"
#include "pmffnn/rng.hpp"

namespace pmffnn::testing {

/// Analytic vs numeric gradient comparison: relative error below rel_tol,
/// with an absolute floor at the finite-difference noise level.
inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-4,
                       double abs_floor = 1e-8) {
  const double diff = std::abs(analytic - numeric);
  if (diff < abs_floor) return true;
  return diff / std::max(std::abs(analytic), std::abs(numeric)) < rel_tol;
}

/// Central finite difference of a scalar function through one coordinate.
inline double central_diff(const std::function<double()>& f, double* x, double h = 1e-5) {
  const double saved = *x;
  *x = saved + h;
  const double fp = f();
  *x = saved - h;
  const double fm = f();
  *x = saved;
  return (fp - fm) / (2.0 * h);
}

struct GradCheckStats {
  double worst_rel = 0.0;
  std::size_t checked = 0;
  bool ok = true;
};

/// Checks a single layer: the scalar probe is sum(forward(x) * projection).
/// Every forward runs with a fresh copy of the same rng seed so stochastic
/// layers see identical masks on both finite-difference evaluations.
inline GradCheckStats check_layer_gradients(Layer& layer, Matrix2D x, Mode mode,
                                            std::uint64_t rng_seed, double rel_tol = 1e-4) {
  Rng proj_rng(rng_seed ^ 0xabcdef);
  Matrix2D first = [&] {
    Rng rng(rng_seed);
    return layer.forward(x, mode, rng);
  }();
  const Matrix2D projection = proj_rng.normal_matrix(first.rows(), first.cols(), 0.0, 1.0);

  auto loss = [&]() {
    Rng rng(rng_seed);
    const Matrix2D y = layer.forward(x, mode, rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y.flat()[i] * projection.flat()[i];
    return acc;
  };

  layer.zero_grads();
  loss();  // repopulate the cache so backward matches the probe
  const Matrix2D input_grad = layer.backward(projection);

  GradCheckStats stats;
  auto compare = [&](double analytic, double* slot) {
    const double numeric = central_diff(loss, slot);
    const double diff = std::abs(analytic - numeric);
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    if (denom > 0.0) stats.worst_rel = std::max(stats.worst_rel, diff / denom);
    if (!grad_close(analytic, numeric, rel_tol)) stats.ok = false;
    ++stats.checked;
  };

  for (std::size_t i = 0; i < x.size(); ++i) compare(input_grad.flat()[i], &x.flat()[i]);
  for (auto& p : layer.trainable_params()) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      compare(p.grad->flat()[i], &p.value->flat()[i]);
    }
  }
  return stats;
}

}  // namespace pmffnn::testing
