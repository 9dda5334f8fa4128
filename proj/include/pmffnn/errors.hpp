#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pmffnn {

/// Dimension mismatch between tensors or between a tensor and a layer.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside its valid range (rates, sizes, labels, fractions).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse, e.g. backward without a cached forward pass.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid architecture or training configuration. Carries the offending
/// field path ("pathway.hidden_dim") so the CLI can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error(field_path + ": " + message),
        field_path_(std::move(field_path)) {}

  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

/// File-level problems: missing files, malformed CSV cells, bad headers.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmffnn
