#pragma once

#include <cstdint>
#include <vector>

#include "pmffnn/matrix.hpp"

namespace pmffnn {

/// Deterministic random stream: xoshiro256++ seeded through splitmix64.
///
/// The algorithm is fixed so that a seed reproduces the same sequence on
/// every platform. Gaussian draws use Box-Muller on the raw 53-bit
/// uniforms rather than std::normal_distribution, whose output is
/// implementation-defined.
///
/// A stream is single-owner mutable state; derive() children are
/// independent streams keyed off the base seed, unaffected by how many
/// draws the parent has made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, n); modulo reduction (bias is irrelevant here,
  /// reproducibility is the contract).
  std::uint64_t next_below(std::uint64_t n);

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  /// Standard normal draw (Box-Muller, second value cached).
  double normal();

  /// DomainError when stddev < 0; stddev == 0 returns mean without a draw.
  double normal(double mean, double stddev);

  /// Matrix of i.i.d. draws; stddev == 0 yields a constant matrix.
  Matrix2D normal_matrix(std::size_t rows, std::size_t cols, double mean, double stddev);

  /// Independent child stream for the given tag.
  Rng derive(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates permutation of 0..n-1 drawn from the given stream.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace pmffnn
