#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace auxguide {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seeded random stream. Streams are addressed by (seed, key...) so that
/// work split across threads draws from the same numbers regardless of the
/// thread count: derive one stream per sample / shard, never share one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(mix64(seed)), engine_(root_) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  /// Child stream keyed off this stream's root seed (does not advance *this).
  Rng split(std::uint64_t key) const { return Rng(root_, {key}); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  void fill_normal(std::span<double> out, double scale = 1.0);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t root_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace auxguide
