#include "pmffnn/rng.hpp"

#include <cmath>
#include <numbers>

#include "pmffnn/errors.hpp"

namespace pmffnn {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw DomainError("next_below: n must be positive");
  return next_u64() % n;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) {
  if (stddev < 0.0) throw DomainError("normal: stddev must be >= 0");
  if (stddev == 0.0) return mean;
  return mean + stddev * normal();
}

Matrix2D Rng::normal_matrix(std::size_t rows, std::size_t cols, double mean, double stddev) {
  if (stddev < 0.0) throw DomainError("normal_matrix: stddev must be >= 0");
  Matrix2D out(rows, cols, mean);
  if (stddev == 0.0) return out;
  for (double& v : out.flat()) v = mean + stddev * normal();
  return out;
}

Rng Rng::derive(std::uint64_t tag) const {
  // Child seed mixes the base seed with the tag; draws on the parent do
  // not move the child.
  std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ULL * (tag + 1);
  return Rng(splitmix64(x));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace pmffnn
