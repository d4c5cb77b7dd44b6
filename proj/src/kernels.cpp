#include "auxguide/kernels.hpp"

#include <cstdint>

namespace auxguide::kernels {
namespace {

// Row bodies shared by both variants; the parallel versions only split the
// outer row loop, so the accumulation order per element never changes.

inline void matmul_row(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                       std::size_t n) {
  double* ci = c + i * n;
  for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
  const double* ai = a + i * k;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double aik = ai[kk];
    const double* bk = b + kk * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
  }
}

inline void matmul_tn_row(const double* a, const double* b, double* c, std::size_t i,
                          std::size_t k, std::size_t m, std::size_t n) {
  double* ci = c + i * n;
  for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double aki = a[kk * m + i];
    if (aki == 0.0) continue;
    const double* bk = b + kk * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
  }
}

inline void matmul_nt_row(const double* a, const double* b, double* c, std::size_t i,
                          std::size_t k, std::size_t n) {
  const double* ai = a + i * k;
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double s = 0.0;
    for (std::size_t kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
    c[i * n + j] = s;
  }
}

inline void sq_dist_row(const double* x, const double* y, double* d, std::size_t i,
                        std::size_t m, std::size_t dim) {
  const double* xi = x + i * dim;
  for (std::size_t j = 0; j < m; ++j) {
    const double* yj = y + j * dim;
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      const double diff = xi[t] - yj[t];
      s += diff * diff;
    }
    d[i * m + j] = s;
  }
}

}  // namespace

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a.data(), b.data(), c.data(), i, k, n);
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_tn_row(a.data(), b.data(), c.data(), i, k, m, n);
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_nt_row(a.data(), b.data(), c.data(), i, k, n);
}

void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim) {
  for (std::size_t i = 0; i < n; ++i) sq_dist_row(x.data(), y.data(), d.data(), i, m, dim);
}

}  // namespace serial

namespace omp {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    matmul_row(a.data(), b.data(), c.data(), static_cast<std::size_t>(i), k, n);
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    matmul_tn_row(a.data(), b.data(), c.data(), static_cast<std::size_t>(i), k, m, n);
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    matmul_nt_row(a.data(), b.data(), c.data(), static_cast<std::size_t>(i), k, n);
}

void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim) {
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    sq_dist_row(x.data(), y.data(), d.data(), static_cast<std::size_t>(i), m, dim);
}

}  // namespace omp

bool openmp_enabled() noexcept {
#ifdef AUXGUIDE_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

#ifdef AUXGUIDE_HAVE_OPENMP
namespace impl = omp;
#else
namespace impl = serial;
#endif

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
  impl::matmul(a, b, c, m, k, n);
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t k, std::size_t m, std::size_t n) {
  impl::matmul_tn(a, b, c, k, m, n);
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n) {
  impl::matmul_nt(a, b, c, m, k, n);
}

void pairwise_sq_dist(std::span<const double> x, std::span<const double> y, std::span<double> d,
                      std::size_t n, std::size_t m, std::size_t dim) {
  impl::pairwise_sq_dist(x, y, d, n, m, dim);
}

}  // namespace auxguide::kernels
