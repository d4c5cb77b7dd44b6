#include <cmath>

#include "auxguide/linalg.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::linalg;
using testutil::error_code_of;
using testutil::random_matrix;

namespace {

Matrix reconstruct(const SvdResult& s) {
  Matrix us = s.u;
  for (std::size_t r = 0; r < us.rows(); ++r)
    for (std::size_t c = 0; c < us.cols(); ++c) us(r, c) *= s.singular_values[c];
  return us * s.vt;
}

// Gauss-Jordan inverse with partial pivoting, used as an independent check.
Matrix gauss_inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(p, k));
      std::swap(inv(c, k), inv(p, k));
    }
    const double d = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double m = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= m * a(c, k);
        inv(r, k) -= m * inv(c, k);
      }
    }
  }
  return inv;
}

void check_penrose(const Matrix& a, double tol) {
  const Matrix p = pseudo_inverse(a);
  const Matrix ap = a * p, pa = p * a;
  CHECK(max_abs_diff(ap * a, a) < tol);
  CHECK(max_abs_diff(pa * p, p) < tol);
  CHECK(max_abs_diff(ap.transpose(), ap) < tol);
  CHECK(max_abs_diff(pa.transpose(), pa) < tol);
}

}  // namespace

TEST_CASE("svd of identity and diagonal") {
  const auto s = svd_thin(Matrix::identity(3));
  for (double v : s.singular_values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(reconstruct(s), Matrix::identity(3)) < 1e-14);

  const auto d = svd_thin(Matrix{{3, 0, 0}, {0, 2, 0}, {0, 0, 0}});
  CHECK(d.singular_values[0] == doctest::Approx(3.0));
  CHECK(d.singular_values[1] == doctest::Approx(2.0));
  CHECK(std::abs(d.singular_values[2]) < 1e-15);
}

TEST_CASE("svd reconstructs and has orthonormal factors") {
  for (auto [r, c] : {std::pair{5, 3}, {3, 5}, {8, 8}, {1, 4}, {12, 2}}) {
    const Matrix a = random_matrix(r, c, 11);
    const auto s = svd_thin(a);
    CHECK(frobenius_norm(reconstruct(s) - a) / frobenius_norm(a) < 1e-9);
    const std::size_t k = std::min(r, c);
    CHECK(max_abs_diff(s.u.transpose() * s.u, Matrix::identity(k)) < 1e-10);
    CHECK(max_abs_diff(s.vt * s.vt.transpose(), Matrix::identity(k)) < 1e-10);
    for (std::size_t i = 0; i + 1 < k; ++i) CHECK(s.singular_values[i] >= s.singular_values[i + 1]);
    CHECK(s.singular_values[k - 1] >= 0.0);
  }
}

TEST_CASE("pseudo-inverse hand cases") {
  CHECK(max_abs_diff(pseudo_inverse(Matrix::identity(3)), Matrix::identity(3)) < 1e-14);
  const Matrix e{{1, 0}, {0, 0}};
  CHECK(max_abs_diff(pseudo_inverse(e), e) < 1e-14);

  const Matrix a{{1, 2}, {3, 4}};
  const double det = 1 * 4 - 2 * 3;
  const Matrix closed{{4 / det, -2 / det}, {-3 / det, 1 / det}};
  CHECK(max_abs_diff(pseudo_inverse(a), closed) < 1e-12);
  CHECK(max_abs_diff(closed, Matrix{{-2, 1}, {1.5, -0.5}}) < 1e-15);
}

TEST_CASE("Penrose conditions on random and rank-deficient matrices") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    check_penrose(random_matrix(4 + seed % 3, 7, seed), 1e-9);
    check_penrose(random_matrix(6, 3 + seed % 4, seed + 100), 1e-9);
  }
  // rank 2 in a 5x6 matrix
  const Matrix low = random_matrix(5, 2, 3) * random_matrix(2, 6, 4);
  check_penrose(low, 1e-9);
  CHECK(numerical_rank(svd_thin(low), default_rank_tolerance(low)) == 2);
  check_penrose(Matrix(3, 4, 0.0), 1e-15);
}

TEST_CASE("projector pair hand cases") {
  auto p = projector_pair(Matrix{{1, 0}});
  CHECK(max_abs_diff(p.parallel, Matrix{{1, 0}, {0, 0}}) < 1e-14);
  CHECK(p.rank == 1);

  p = projector_pair(Matrix{{1, 1}});
  CHECK(max_abs_diff(p.parallel, Matrix{{0.5, 0.5}, {0.5, 0.5}}) < 1e-14);

  p = projector_pair(Matrix::identity(2));
  CHECK(max_abs_diff(p.parallel, Matrix::identity(2)) < 1e-14);
  CHECK(max_abs(p.perpendicular) < 1e-14);

  CHECK(error_code_of([] { projector_pair(Matrix(2, 5, 0.0)); }) == ErrorCode::DegenerateFraming);
}

TEST_CASE("projector pair properties and full-rank formula") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t nz = 1 + seed % 4, n = nz + 2 + seed % 5;
    const Matrix f = random_matrix(nz, n, seed);
    const auto p = projector_pair(f);
    const Matrix I = Matrix::identity(n);
    CHECK(p.rank == nz);
    CHECK(max_abs_diff(p.parallel * p.parallel, p.parallel) < 1e-9);
    CHECK(max_abs_diff(p.perpendicular * p.perpendicular, p.perpendicular) < 1e-9);
    CHECK(max_abs_diff(p.parallel.transpose(), p.parallel) < 1e-9);
    CHECK(max_abs_diff(p.parallel + p.perpendicular, I) < 1e-12);
    CHECK(max_abs(f * p.perpendicular) < 1e-9);
    CHECK(max_abs(p.parallel * p.perpendicular) < 1e-10);

    const Matrix ft = f.transpose();
    const Matrix oracle = ft * gauss_inverse(f * ft) * f;
    CHECK(max_abs_diff(p.parallel, oracle) < 1e-9);

    Vector u(n);
    Rng(seed, {7}).fill_normal(u);
    const Vector a = p.parallel * u, b = p.perpendicular * u;
    CHECK(std::abs(dot(a, b)) < 1e-8 * dot(u, u));
  }
}

TEST_CASE("rank-deficient framing keeps the row space") {
  const Matrix f = random_matrix(3, 1, 5) * random_matrix(1, 6, 6);
  const auto p = projector_pair(f);
  CHECK(p.rank == 1);
  CHECK(trace(p.parallel) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs(f * p.perpendicular) < 1e-12);
}

TEST_CASE("symmetric square root") {
  CHECK(max_abs_diff(sym_sqrt(Matrix::identity(4)), Matrix::identity(4)) < 1e-14);
  CHECK(max_abs_diff(sym_sqrt(Matrix{{4, 0}, {0, 9}}), Matrix{{2, 0}, {0, 3}}) < 1e-14);

  // [[2,1],[1,2]] has eigenvalues 1 (v=(1,-1)/sqrt2) and 3 (v=(1,1)/sqrt2).
  const double a = (std::sqrt(3.0) + 1.0) / 2.0, b = (std::sqrt(3.0) - 1.0) / 2.0;
  const Matrix root = sym_sqrt(Matrix{{2, 1}, {1, 2}});
  CHECK(max_abs_diff(root, Matrix{{a, b}, {b, a}}) < 1e-12);
  CHECK(max_abs_diff(root * root, Matrix{{2, 1}, {1, 2}}) < 1e-10);

  // closed form for 2x2 SPD: (A + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
  const Matrix s{{5, 2}, {2, 3}};
  const double sd = std::sqrt(5.0 * 3 - 4);
  const Matrix closed = (s + Matrix::identity(2) * sd) * (1.0 / std::sqrt(8 + 2 * sd));
  CHECK(max_abs_diff(sym_sqrt(s), closed) < 1e-12);

  const Matrix g = random_matrix(6, 3, 9);
  const Matrix psd = g * g.transpose();  // rank 3
  const Matrix r = sym_sqrt(psd);
  CHECK(max_abs_diff(r * r, psd) < 1e-7);
  CHECK(max_abs_diff(r.transpose(), r) < 1e-12);
  for (double v : sym_eigen(r).values) CHECK(v >= -1e-12);

  CHECK(error_code_of([] { sym_sqrt(Matrix{{1, 2}, {0, 1}}); }) == ErrorCode::NotSymmetric);
  CHECK(error_code_of([] { sym_sqrt(Matrix{{1, 0}, {0, -1}}); }) == ErrorCode::NegativeEigenvalue);
  CHECK_NOTHROW(sym_sqrt(Matrix{{1, 0}, {0, -1e-10}}));
}

TEST_CASE("projector basis spans the range") {
  const auto p = projector_pair(random_matrix(3, 7, 2));
  const Matrix q = projector_basis(p.parallel);
  CHECK(q.cols() == 3);
  CHECK(max_abs_diff(q.transpose() * q, Matrix::identity(3)) < 1e-10);
  CHECK(max_abs_diff(q * q.transpose(), p.parallel) < 1e-10);
}
