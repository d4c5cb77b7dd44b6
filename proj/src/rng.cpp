#include "auxguide/rng.hpp"

namespace auxguide {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    : root_(derive(seed, keys)), engine_(root_) {}

std::uint64_t Rng::below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

void Rng::fill_normal(std::span<double> out, double scale) {
  for (double& v : out) v = scale * normal_(engine_);
}

}  // namespace auxguide
