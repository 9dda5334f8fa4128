#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmffnn/config.hpp"
#include "pmffnn/matrix.hpp"

namespace pmffnn {

/// A loaded dataset: features plus either class indices (classification)
/// or a target matrix (regression).
struct DatasetTable {
  Matrix2D features;
  Task task = Task::Classification;
  std::vector<int> labels;  // classification targets, dense indices
  Matrix2D targets;         // regression targets, rows x target_dim
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // label strings by first appearance

  std::size_t n_rows() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }
};

/// Strict CSV reader: comma separator, mandatory header row, decimal
/// numbers, no quoting, no missing values. Classification target labels
/// map to dense indices in first-appearance order. ParseError reports the
/// data row (1-based) and column name of the first offending cell.
DatasetTable load_csv(const std::string& path, const std::string& target_column, Task task);

/// Writer matching load_csv's dialect; numbers round-trip bit-exactly.
void save_csv(const std::string& path, const DatasetTable& table,
              const std::string& target_column = "label");

struct StandardizeStats {
  Matrix2D mean;    // 1 x cols
  Matrix2D stddev;  // 1 x cols, biased (divide by rows)
};

struct StandardizeResult {
  DatasetTable train;
  DatasetTable applied;
  StandardizeStats stats;
};

/// (x - mean) / max(stddev, 1e-8) per column, statistics learned on the
/// training split and applied to both tables.
StandardizeResult standardize(const DatasetTable& train, const DatasetTable& apply_to);

DatasetTable apply_standardize(const DatasetTable& table, const StandardizeStats& stats);

struct SplitResult {
  DatasetTable train;
  DatasetTable test;
};

/// Seeded row permutation, then a disjoint exhaustive split. The test
/// split gets round(n * test_fraction) rows; both splits must be
/// non-empty.
SplitResult train_test_split(const DatasetTable& table, double test_fraction, std::uint64_t seed);

/// The score weights behind synth_blockwise, exposed so tests can evaluate
/// the generative rule directly.
struct SynthModel {
  std::vector<std::vector<int>> groups;  // contiguous, remainder to last
  Matrix2D class_weights;                // n_classes x n_groups, rows orthonormalized
};

SynthModel synth_blockwise_model(int n_features, int n_groups, int n_classes, std::uint64_t seed);

/// Synthetic wide-table generator: i.i.d. standard-normal features; the
/// class is the argmax of per-class scores that are linear in normalized
/// per-group sums, plus Gaussian noise on the scores. Every group carries
/// independent signal, so masking any group loses information.
DatasetTable synth_blockwise(int n_rows, int n_features, int n_groups, int n_classes,
                             double noise_std, std::uint64_t seed);

}  // namespace pmffnn
