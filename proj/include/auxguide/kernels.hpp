#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP variant in kernels::omp; both accumulate
// each output element in the same order, so their results are
// bit-identical. The unqualified entry points dispatch to the OpenMP
// variant when it was compiled in.

#include <cstddef>
#include <span>

namespace auxguide::kernels {

namespace serial {

// c (m x n) = a (m x k) * b (k x n)
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
// c (m x n) = a^T * b with a (k x m), b (k x n)
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n);
// c (m x n) = a * b^T with a (m x k), b (n x k)
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n);
// d (n x m) squared Euclidean distances between rows of x (n x dim) and y (m x dim)
void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim);

}  // namespace serial

namespace omp {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n);
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n);
void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim);

}  // namespace omp

bool openmp_enabled() noexcept;

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n);
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n);
void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim);

}  // namespace auxguide::kernels
