#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace pmffnn {

enum class ModelKind { PMFFNN, DeepFFNN, CNN1D };
enum class Task { Classification, Regression };

std::string model_kind_name(ModelKind kind);
std::string task_name(Task task);

/// One micro network: BatchNorm -> Dense+SELU -> repeated
/// [BatchNorm, Dense, Dropout] blocks -> Dense+Sigmoid -> BatchNorm.
struct PathwayConfig {
  int hidden_dim = 32;
  int repeat_blocks = 1;
  double dropout_rate = 0.2;
  int output_dim = 8;
};

/// Shared head after concatenation: Dense -> Dropout -> BatchNorm ->
/// Dense(n_outputs) -> Softmax (classification) or linear (regression).
struct HeadConfig {
  int hidden_dim = 16;
  double dropout_rate = 0.3;
};

/// Convolutional trunk of the cnn1d baseline.
struct ConvConfig {
  int kernel_size = 3;
  int out_channels = 8;
  int blocks = 1;
};

/// Either an automatic count of contiguous near-equal groups or explicit
/// column-index lists.
using GroupsSpec = std::variant<int, std::vector<std::vector<int>>>;

struct ArchConfig {
  ModelKind kind = ModelKind::PMFFNN;
  int n_features = 0;
  int n_outputs = 0;
  Task task = Task::Classification;
  GroupsSpec groups = 1;
  bool include_full_pathway = false;
  PathwayConfig pathway;
  HeadConfig head;
  ConvConfig conv;
};

/// Parses and validates the JSON architecture document. Unknown keys, type
/// mismatches, and out-of-range values raise ConfigError carrying the
/// offending field path.
ArchConfig parse_arch_config(const std::string& json_text);
ArchConfig load_arch_config(const std::string& path);

/// Fully resolved snapshot (defaults filled in) for run manifests.
std::string arch_config_to_json(const ArchConfig& cfg);

}  // namespace pmffnn
