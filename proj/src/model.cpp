#include "pmffnn/model.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "pmffnn/errors.hpp"

namespace pmffnn {

namespace {

// Stream tags; the offsets keep branch streams apart from the head and
// from anything the training loop derives.
constexpr std::uint64_t kInitTagBase = 1000;
constexpr std::uint64_t kDropoutTagBase = 2000;
constexpr std::uint64_t kHeadInitTag = 900;
constexpr std::uint64_t kHeadDropoutTag = 901;

/// Runs fn(0..n-1) on up to `threads` workers. Tasks are independent by
/// contract; the first exception is rethrown on the caller.
void parallel_for(int threads, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int workers = threads;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<std::size_t>(workers, n));

  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Matrix2D run_stack_forward(std::vector<std::unique_ptr<Layer>>& layers, const Matrix2D& x,
                           Mode mode, Rng& rng) {
  Matrix2D cur = x;
  for (auto& layer : layers) cur = layer->forward(cur, mode, rng);
  return cur;
}

Matrix2D run_stack_backward(std::vector<std::unique_ptr<Layer>>& layers, const Matrix2D& upstream,
                            std::size_t skip_trailing = 0) {
  Matrix2D cur = upstream;
  for (std::size_t i = layers.size() - skip_trailing; i-- > 0;) {
    cur = layers[i]->backward(cur);
  }
  return cur;
}

}  // namespace

ColumnGroups make_auto_groups(int n_features, int n_groups, bool include_full_pathway) {
  if (n_groups < 1) throw DomainError("auto groups: count must be >= 1");
  if (n_groups > n_features) {
    throw DomainError("auto groups: " + std::to_string(n_groups) + " groups cannot cover " +
                      std::to_string(n_features) + " features");
  }
  ColumnGroups cg;
  cg.include_full_pathway = include_full_pathway;
  const int base = n_features / n_groups;
  int col = 0;
  for (int g = 0; g < n_groups; ++g) {
    // remainder columns are appended to the last group
    const int width = (g == n_groups - 1) ? n_features - col : base;
    std::vector<int> cols(width);
    for (int i = 0; i < width; ++i) cols[i] = col + i;
    col += width;
    cg.groups.push_back(std::move(cols));
  }
  return cg;
}

void validate_column_groups(const ColumnGroups& cg, int n_features) {
  if (cg.groups.empty()) throw DomainError("column groups: at least one group is required");
  for (std::size_t g = 0; g < cg.groups.size(); ++g) {
    if (cg.groups[g].empty()) {
      throw DomainError("column groups: group " + std::to_string(g) + " is empty");
    }
    std::set<int> seen;
    for (int c : cg.groups[g]) {
      if (c < 0 || c >= n_features) {
        throw ShapeError("column groups: index " + std::to_string(c) + " out of range [0, " +
                         std::to_string(n_features) + ")");
      }
      if (!seen.insert(c).second) {
        throw DomainError("column groups: duplicate index " + std::to_string(c) + " in group " +
                          std::to_string(g));
      }
    }
  }
}

ColumnGroups resolve_groups(const ArchConfig& cfg) {
  ColumnGroups cg;
  if (std::holds_alternative<int>(cfg.groups)) {
    cg = make_auto_groups(cfg.n_features, std::get<int>(cfg.groups), cfg.include_full_pathway);
  } else {
    cg.groups = std::get<std::vector<std::vector<int>>>(cfg.groups);
    cg.include_full_pathway = cfg.include_full_pathway;
  }
  validate_column_groups(cg, cfg.n_features);
  return cg;
}

std::vector<Matrix2D> split_columns(const Matrix2D& x, const ColumnGroups& cg) {
  std::vector<Matrix2D> slices;
  slices.reserve(cg.groups.size());
  for (const auto& group : cg.groups) slices.push_back(select_cols(x, group));
  return slices;
}

std::vector<LayerSpec> micro_ffnn_specs(int input_dim, const PathwayConfig& cfg) {
  if (input_dim < 1) throw DomainError("micro ffnn: input_dim must be >= 1");
  std::vector<LayerSpec> specs;
  specs.push_back(LayerSpec::batch_norm(input_dim));
  specs.push_back(LayerSpec::dense(input_dim, cfg.hidden_dim));
  specs.push_back(LayerSpec::act(ActivationKind::Selu, cfg.hidden_dim));
  for (int b = 0; b < cfg.repeat_blocks; ++b) {
    specs.push_back(LayerSpec::batch_norm(cfg.hidden_dim));
    specs.push_back(LayerSpec::dense(cfg.hidden_dim, cfg.hidden_dim));
    specs.push_back(LayerSpec::dropout(cfg.hidden_dim, cfg.dropout_rate));
  }
  specs.push_back(LayerSpec::dense(cfg.hidden_dim, cfg.output_dim));
  specs.push_back(LayerSpec::act(ActivationKind::Sigmoid, cfg.output_dim));
  specs.push_back(LayerSpec::batch_norm(cfg.output_dim));
  return specs;
}

std::vector<LayerSpec> head_specs(int input_dim, const HeadConfig& cfg, int n_outputs, Task task) {
  std::vector<LayerSpec> specs;
  specs.push_back(LayerSpec::dense(input_dim, cfg.hidden_dim));
  specs.push_back(LayerSpec::dropout(cfg.hidden_dim, cfg.dropout_rate));
  specs.push_back(LayerSpec::batch_norm(cfg.hidden_dim));
  specs.push_back(LayerSpec::dense(cfg.hidden_dim, n_outputs));
  if (task == Task::Classification) {
    specs.push_back(LayerSpec::act(ActivationKind::Softmax, n_outputs));
  }
  return specs;
}

std::vector<LayerSpec> conv_trunk_specs(int n_features, const ConvConfig& cfg) {
  std::vector<LayerSpec> specs;
  int length = n_features;
  int channels = 1;
  for (int b = 0; b < cfg.blocks; ++b) {
    if (length < cfg.kernel_size) {
      throw ConfigError("conv.blocks", "block " + std::to_string(b) + " input length " +
                                           std::to_string(length) + " is shorter than the kernel");
    }
    specs.push_back(LayerSpec::conv1d(length, channels, cfg.kernel_size, cfg.out_channels));
    length = length - cfg.kernel_size + 1;
    channels = cfg.out_channels;
    specs.push_back(LayerSpec::act(ActivationKind::Relu, channels * length));
  }
  return specs;
}

ModelGraph ModelGraph::build(const ArchConfig& cfg, std::uint64_t seed) {
  ModelGraph model;
  model.cfg_ = cfg;
  const Rng root(seed);

  auto materialize = [](const std::vector<LayerSpec>& specs, Rng init_rng) {
    std::vector<std::unique_ptr<Layer>> layers;
    layers.reserve(specs.size());
    for (const auto& spec : specs) layers.push_back(make_layer(spec, init_rng));
    return layers;
  };

  std::size_t branch_index = 0;
  auto add_branch = [&](std::string name, std::vector<int> columns, bool takes_all,
                        const std::vector<LayerSpec>& specs, int out_dim) {
    Branch b;
    b.name = std::move(name);
    b.columns = std::move(columns);
    b.takes_all_columns = takes_all;
    b.layers = materialize(specs, root.derive(kInitTagBase + branch_index));
    b.rng = root.derive(kDropoutTagBase + branch_index);
    b.out_dim = out_dim;
    model.branches_.push_back(std::move(b));
    ++branch_index;
  };

  switch (cfg.kind) {
    case ModelKind::PMFFNN: {
      model.column_groups_ = resolve_groups(cfg);
      // Fig-style layout: the optional full pathway comes first, then the
      // subset pathways in group order.
      if (model.column_groups_.include_full_pathway) {
        add_branch("full", {}, true, micro_ffnn_specs(cfg.n_features, cfg.pathway),
                   cfg.pathway.output_dim);
      }
      for (std::size_t g = 0; g < model.column_groups_.groups.size(); ++g) {
        const auto& cols = model.column_groups_.groups[g];
        add_branch("group" + std::to_string(g), cols, false,
                   micro_ffnn_specs(static_cast<int>(cols.size()), cfg.pathway),
                   cfg.pathway.output_dim);
      }
      break;
    }
    case ModelKind::DeepFFNN: {
      add_branch("trunk", {}, true, micro_ffnn_specs(cfg.n_features, cfg.pathway),
                 cfg.pathway.output_dim);
      break;
    }
    case ModelKind::CNN1D: {
      const auto trunk = conv_trunk_specs(cfg.n_features, cfg.conv);
      add_branch("trunk", {}, true, trunk, trunk.back().out_dim);
      break;
    }
  }

  int concat_dim = 0;
  for (const auto& b : model.branches_) concat_dim += b.out_dim;
  if (concat_dim < 1) throw ConfigError("groups", "model has no branch outputs");

  model.head_ = materialize(head_specs(concat_dim, cfg.head, cfg.n_outputs, cfg.task),
                            root.derive(kHeadInitTag));
  model.head_rng_ = root.derive(kHeadDropoutTag);
  return model;
}

void ModelGraph::run_branches_forward(const Matrix2D& x, Mode mode, std::vector<Matrix2D>& outs) {
  outs.resize(branches_.size());
  parallel_for(threads_, branches_.size(), [&](std::size_t i) {
    Branch& b = branches_[i];
    const Matrix2D input = b.takes_all_columns ? x : select_cols(x, b.columns);
    outs[i] = run_stack_forward(b.layers, input, mode, b.rng);
  });
}

Matrix2D ModelGraph::forward_concat(const Matrix2D& x, Mode mode) {
  if (static_cast<int>(x.cols()) != cfg_.n_features) {
    throw ShapeError("model forward: expected " + std::to_string(cfg_.n_features) +
                     " features, got " + x.shape_str());
  }
  std::vector<Matrix2D> outs;
  run_branches_forward(x, mode, outs);
  return concat_cols(outs);
}

Matrix2D ModelGraph::forward(const Matrix2D& x, Mode mode) {
  Matrix2D concat = forward_concat(x, mode);
  Matrix2D y = run_stack_forward(head_, concat, mode, head_rng_);
  forward_ran_ = true;
  return y;
}

void ModelGraph::backward(const Matrix2D& upstream, bool upstream_at_logits) {
  if (!forward_ran_) throw StateError("model backward without a forward pass");

  std::size_t skip = 0;
  if (upstream_at_logits) {
    if (!softmax_output()) {
      throw StateError("logits-level backward requires a softmax output layer");
    }
    skip = 1;  // the fused loss differentiated through the softmax already
  }
  const Matrix2D concat_grad = run_stack_backward(head_, upstream, skip);

  // Split at the concatenation boundary, branch order = concat order.
  std::vector<std::size_t> offsets(branches_.size());
  std::size_t off = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    offsets[i] = off;
    off += static_cast<std::size_t>(branches_[i].out_dim);
  }
  if (off != concat_grad.cols()) {
    throw ShapeError("model backward: concat gradient " + concat_grad.shape_str() +
                     " does not match branch outputs");
  }

  parallel_for(threads_, branches_.size(), [&](std::size_t i) {
    Branch& b = branches_[i];
    Matrix2D slice(concat_grad.rows(), static_cast<std::size_t>(b.out_dim));
    for (std::size_t r = 0; r < concat_grad.rows(); ++r) {
      for (int c = 0; c < b.out_dim; ++c) slice(r, c) = concat_grad(r, offsets[i] + c);
    }
    run_stack_backward(b.layers, slice);
  });
}

void ModelGraph::zero_grads() {
  for (auto& b : branches_) {
    for (auto& layer : b.layers) layer->zero_grads();
  }
  for (auto& layer : head_) layer->zero_grads();
}

namespace {

void collect_refs(std::vector<std::unique_ptr<Layer>>& layers, const std::string& prefix,
                  bool want_buffers, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto refs = want_buffers ? layers[i]->buffers() : layers[i]->trainable_params();
    for (auto& r : refs) {
      r.name = prefix + ".layer" + std::to_string(i) + "." + r.name;
      out.push_back(r);
    }
  }
}

}  // namespace

std::vector<ParamRef> ModelGraph::trainable_params() {
  std::vector<ParamRef> out;
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    collect_refs(branches_[b].layers, "branch" + std::to_string(b), false, out);
  }
  collect_refs(head_, "head", false, out);
  return out;
}

std::vector<ParamRef> ModelGraph::buffers() {
  std::vector<ParamRef> out;
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    collect_refs(branches_[b].layers, "branch" + std::to_string(b), true, out);
  }
  collect_refs(head_, "head", true, out);
  return out;
}

ParamBreakdown ModelGraph::count_parameters() const {
  ParamBreakdown pb;
  for (const auto& b : branches_) {
    BranchParamCount bc;
    bc.name = b.name;
    bc.input_dim = b.takes_all_columns ? cfg_.n_features : static_cast<int>(b.columns.size());
    for (const auto& layer : b.layers) {
      const long long n = param_count(layer->spec());
      bc.total += n;
      if (bc.first_dense == 0 && n > 0 &&
          (layer->spec().kind == LayerKind::Dense || layer->spec().kind == LayerKind::Conv1D)) {
        bc.first_dense = n;
      }
    }
    pb.total += bc.total;
    pb.branches.push_back(std::move(bc));
  }
  for (const auto& layer : head_) pb.head += param_count(layer->spec());
  pb.total += pb.head;

  if (cfg_.kind == ModelKind::PMFFNN) {
    for (const auto& bc : pb.branches) pb.first_layer_pathways += bc.first_dense;
    pb.monolithic_hidden_width = static_cast<int>(branches_.size()) * cfg_.pathway.hidden_dim;
    pb.first_layer_monolithic =
        static_cast<long long>(cfg_.n_features) * pb.monolithic_hidden_width +
        pb.monolithic_hidden_width;
    if (pb.first_layer_pathways > 0) {
      pb.first_layer_reduction =
          static_cast<double>(pb.first_layer_monolithic) / pb.first_layer_pathways;
    }
  }
  return pb;
}

void ModelGraph::reseed_dropout_streams(std::uint64_t seed) {
  const Rng root(seed);
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    branches_[i].rng = root.derive(kDropoutTagBase + i);
  }
  head_rng_ = root.derive(kHeadDropoutTag);
}

bool ModelGraph::has_batchnorm() const {
  for (const auto& b : branches_) {
    for (const auto& layer : b.layers) {
      if (layer->spec().kind == LayerKind::BatchNorm) return true;
    }
  }
  for (const auto& layer : head_) {
    if (layer->spec().kind == LayerKind::BatchNorm) return true;
  }
  return false;
}

bool ModelGraph::softmax_output() const {
  return !head_.empty() && head_.back()->spec().kind == LayerKind::Activation &&
         head_.back()->spec().activation == ActivationKind::Softmax;
}

}  // namespace pmffnn
