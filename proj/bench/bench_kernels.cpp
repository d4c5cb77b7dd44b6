#include <benchmark/benchmark.h>

#include <vector>

#include "auxguide/kernels.hpp"
#include "auxguide/rng.hpp"

namespace {

using namespace auxguide;

std::vector<double> random_vec(std::size_t n, std::uint64_t key) {
  std::vector<double> v(n);
  Rng(7, {key}).fill_normal(v);
  return v;
}

template <void (*Fn)(std::span<const double>, std::span<const double>, std::span<double>,
                     std::size_t, std::size_t, std::size_t)>
void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Fn(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <void (*Fn)(std::span<const double>, std::span<const double>, std::span<double>,
                     std::size_t, std::size_t, std::size_t)>
void bm_pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 36;
  const auto x = random_vec(n * dim, 3), y = random_vec(n * dim, 4);
  std::vector<double> d(n * n);
  for (auto _ : state) {
    Fn(x, y, d, n, n, dim);
    benchmark::DoNotOptimize(d.data());
  }
}

}  // namespace

BENCHMARK(bm_matmul<kernels::serial::matmul>)->Name("matmul/serial")->Arg(128)->Arg(256);
BENCHMARK(bm_matmul<kernels::omp::matmul>)->Name("matmul/omp")->Arg(128)->Arg(256);
BENCHMARK(bm_matmul<kernels::serial::matmul_tn>)->Name("matmul_tn/serial")->Arg(256);
BENCHMARK(bm_matmul<kernels::omp::matmul_tn>)->Name("matmul_tn/omp")->Arg(256);
BENCHMARK(bm_matmul<kernels::serial::matmul_nt>)->Name("matmul_nt/serial")->Arg(256);
BENCHMARK(bm_matmul<kernels::omp::matmul_nt>)->Name("matmul_nt/omp")->Arg(256);
BENCHMARK(bm_pairwise<kernels::serial::pairwise_sq_dist>)->Name("pairwise/serial")->Arg(1024);
BENCHMARK(bm_pairwise<kernels::omp::pairwise_sq_dist>)->Name("pairwise/omp")->Arg(1024);

BENCHMARK_MAIN();
