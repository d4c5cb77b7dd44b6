#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace auxguide::detail {

// Runs fn(shard, begin, end) over fixed-size shards of [0, n) and returns the
// per-shard results in shard order. Each shard must draw from its own RNG
// stream; callers reduce the result vector serially, so the output does not
// depend on the thread count.
template <class Partial, class Fn>
std::vector<Partial> run_shards(std::size_t n, std::size_t shard_size, Fn fn) {
  const std::size_t count = (n + shard_size - 1) / shard_size;
  std::vector<Partial> parts(count);
  const auto shards = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t s = 0; s < shards; ++s) {
    const std::size_t begin = static_cast<std::size_t>(s) * shard_size;
    parts[static_cast<std::size_t>(s)] =
        fn(static_cast<std::size_t>(s), begin, std::min(n, begin + shard_size));
  }
  return parts;
}

}  // namespace auxguide::detail
