#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pmffnn/config.hpp"
#include "pmffnn/layers.hpp"
#include "pmffnn/matrix.hpp"
#include "pmffnn/rng.hpp"

namespace pmffnn {

/// Ordered column-index groups driving the input split. Groups must be
/// non-empty and duplicate-free within themselves; their order fixes the
/// concatenation order.
struct ColumnGroups {
  std::vector<std::vector<int>> groups;
  bool include_full_pathway = false;
};

/// P contiguous near-equal groups; remainder columns go to the last group.
ColumnGroups make_auto_groups(int n_features, int n_groups, bool include_full_pathway);

void validate_column_groups(const ColumnGroups& cg, int n_features);

/// Resolves an ArchConfig groups field (auto count or explicit lists).
ColumnGroups resolve_groups(const ArchConfig& cfg);

/// Slice k holds exactly the columns of group k, in group order.
std::vector<Matrix2D> split_columns(const Matrix2D& x, const ColumnGroups& cg);

/// Layer sequence of one micro network:
/// BN -> Dense -> SELU -> [BN -> Dense -> Dropout] x repeat_blocks
/// -> Dense -> Sigmoid -> BN.
std::vector<LayerSpec> micro_ffnn_specs(int input_dim, const PathwayConfig& cfg);

/// Shared head: Dense -> Dropout -> BN -> Dense(n_outputs)
/// -> Softmax for classification, linear for regression.
std::vector<LayerSpec> head_specs(int input_dim, const HeadConfig& cfg, int n_outputs, Task task);

/// cnn1d trunk: [Conv1D -> ReLU] x blocks over the flat feature axis.
std::vector<LayerSpec> conv_trunk_specs(int n_features, const ConvConfig& cfg);

struct BranchParamCount {
  std::string name;
  int input_dim = 0;
  long long first_dense = 0;  // first parametric layer of the branch
  long long total = 0;
};

struct ParamBreakdown {
  std::vector<BranchParamCount> branches;
  long long head = 0;
  long long total = 0;
  // Width-matched monolithic comparison (meaningful for pmffnn):
  // a single Dense from n_features to the summed branch hidden width.
  long long first_layer_pathways = 0;
  int monolithic_hidden_width = 0;
  long long first_layer_monolithic = 0;
  double first_layer_reduction = 0.0;  // monolithic / pathways
};

/// The assembled network: branches (optional full pathway first, then one
/// per column group) feeding a concatenation and a shared head. The two
/// baselines are the same graph with a single trunk branch.
class ModelGraph {
 public:
  static ModelGraph build(const ArchConfig& cfg, std::uint64_t seed);

  /// Branch execution may be concurrent (set_threads); results are
  /// identical either way because every branch owns its random stream.
  Matrix2D forward(const Matrix2D& x, Mode mode);

  /// Concatenated branch outputs before the head (probe surface for tests).
  Matrix2D forward_concat(const Matrix2D& x, Mode mode);

  /// Routes the upstream gradient back through the head, splits it at the
  /// concatenation boundary, and runs every branch backward. When
  /// upstream_at_logits is set the trailing Softmax layer is skipped: the
  /// gradient is already w.r.t. the pre-softmax logits (fused
  /// cross-entropy).
  void backward(const Matrix2D& upstream, bool upstream_at_logits = false);

  void zero_grads();

  /// All trainable parameters in a stable order (branches, then head),
  /// names prefixed "branch0.layer2.weight" / "head.layer3.gamma".
  std::vector<ParamRef> trainable_params();
  /// Running-stat buffers in the same stable order.
  std::vector<ParamRef> buffers();

  ParamBreakdown count_parameters() const;

  /// 0 = one worker per branch up to hardware concurrency; 1 = sequential.
  void set_threads(int n) { threads_ = n; }
  int threads() const { return threads_; }

  /// Re-derives every dropout stream from the given seed. fit() calls this
  /// so training is reproducible regardless of what ran before.
  void reseed_dropout_streams(std::uint64_t seed);

  const ArchConfig& config() const { return cfg_; }
  const ColumnGroups& column_groups() const { return column_groups_; }
  int n_features() const { return cfg_.n_features; }
  int n_outputs() const { return cfg_.n_outputs; }
  Task task() const { return cfg_.task; }
  ModelKind kind() const { return cfg_.kind; }

  bool has_batchnorm() const;
  bool softmax_output() const;

  std::size_t branch_count() const { return branches_.size(); }
  const std::string& branch_name(std::size_t i) const { return branches_[i].name; }
  int branch_output_dim(std::size_t i) const { return branches_[i].out_dim; }

 private:
  struct Branch {
    std::string name;
    std::vector<int> columns;  // empty for the full pathway / single trunk
    bool takes_all_columns = false;
    std::vector<std::unique_ptr<Layer>> layers;
    Rng rng{0};
    int out_dim = 0;
  };

  ModelGraph() = default;

  void run_branches_forward(const Matrix2D& x, Mode mode, std::vector<Matrix2D>& outs);

  ArchConfig cfg_;
  ColumnGroups column_groups_;
  std::vector<Branch> branches_;
  std::vector<std::unique_ptr<Layer>> head_;
  Rng head_rng_{0};
  int threads_ = 0;
  bool forward_ran_ = false;
};

}  // namespace pmffnn
