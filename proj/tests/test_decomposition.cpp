#include <cmath>
#include <numbers>

#include "auxguide/decomposition.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::decomposition;
using linalg::projector_pair;
using testutil::error_code_of;
using testutil::random_matrix;

namespace {

double log_normal_1d(double x, double mu, double sigma) {
  const double e = (x - mu) / sigma;
  return -0.5 * e * e - std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi);
}

}  // namespace

TEST_CASE("decompose hand cases") {
  const Vector u{3, 4};
  auto s = decompose(u, linalg::full_projector(2));
  CHECK(s.par == u);
  CHECK(s.perp == Vector{0, 0});

  s = decompose(u, projector_pair(Matrix{{1, 0}}));
  CHECK(s.par == Vector{3, 0});
  CHECK(s.perp == Vector{0, 4});

  CHECK(error_code_of([&] { decompose(Vector{1, 2, 3}, projector_pair(Matrix{{1, 0}})); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("decompose is additive and orthogonal") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix f = random_matrix(3, 8, seed);
    const auto p = projector_pair(f);
    Vector u(8);
    Rng(seed, {1}).fill_normal(u, 5.0);
    const auto s = decompose(u, p);
    for (std::size_t i = 0; i < 8; ++i)
      CHECK(std::abs(s.perp[i] + s.par[i] - u[i]) <= 1e-15 * std::max(1.0, std::abs(u[i])));
    CHECK(std::abs(dot(s.perp, s.par)) <= 1e-9 * dot(u, u));
    for (double v : f * std::span<const double>(s.perp)) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("Cochran checks on an axis split") {
  const IsotropicGaussian g{{0, 0}, 1.0};
  const auto rep = cochran_check(g, projector_pair(Matrix{{1, 0}}), 100000, 3);
  CHECK(rep.passed());
  CHECK(rep.n_samples == 100000);
  for (const auto& c : rep.checks) {
    CHECK(c.band == doctest::Approx(5.0 / std::sqrt(1e5)));
    CHECK(c.max_deviation < c.band);
  }

  const auto full = cochran_check(g, linalg::full_projector(2), 10000, 3);
  CHECK(full.passed());
  for (const auto& c : full.checks)
    if (c.name.find("cross") != std::string::npos) CHECK(c.max_deviation == 0.0);

  CHECK(error_code_of([&] { cochran_check(g, linalg::full_projector(2), 9999, 3); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("Cochran checks on a random framing map") {
  const IsotropicGaussian g{{1, -2, 0.5, 0, 3, 1, -1, 2}, 1.5};
  const auto rep = cochran_check(g, projector_pair(random_matrix(3, 8, 4)), 100000, 11);
  CHECK(rep.checks.size() == 5);
  CHECK(rep.passed());
}

TEST_CASE("Cochran check fails when the projector is wrong") {
  // a non-orthogonal "projector" breaks the covariance identity
  auto p = projector_pair(Matrix{{1, 0}});
  p.parallel = Matrix{{1, 1}, {0, 0}};
  p.perpendicular = Matrix{{0, -1}, {0, 1}};
  CHECK_FALSE(cochran_check(IsotropicGaussian{{0, 0}, 1.0}, p, 20000, 1).passed());
}

TEST_CASE("conditional mean") {
  const IsotropicGaussian g{{0, 0}, 1.0};
  const auto m = conditional_mean(g, Matrix{{1, 0}}, Vector{2});
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[1] == 0.0);

  const IsotropicGaussian h{{1, -2, 0.5, 3, 0}, 0.7};
  const Matrix f = random_matrix(2, 5, 6);
  const Vector z = f * std::span<const double>(h.mu);
  const Vector back = conditional_mean(h, f, z);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back[i] == doctest::Approx(h.mu[i]).epsilon(1e-10));

  const Vector z2{0.3, -1.7};
  const Vector fz = f * std::span<const double>(conditional_mean(h, f, z2));
  CHECK(std::abs(fz[0] - z2[0]) < 1e-9);
  CHECK(std::abs(fz[1] - z2[1]) < 1e-9);

  // affine in z
  const Vector a = conditional_mean(h, f, Vector{1, 0}), b = conditional_mean(h, f, Vector{0, 1});
  const Vector o = conditional_mean(h, f, Vector{0, 0}), ab = conditional_mean(h, f, Vector{2, -3});
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(ab[i] == doctest::Approx(o[i] + 2 * (a[i] - o[i]) - 3 * (b[i] - o[i])).epsilon(1e-10));

  CHECK(error_code_of([&] { conditional_mean(h, Matrix{{1, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}, z2); }) ==
        ErrorCode::RankDeficient);
}

TEST_CASE("rejection sampling agrees with the conditional mean") {
  const IsotropicGaussian g{{0.5, -1, 1}, 1.0};
  const Matrix f{{1, 1, 0}};
  const Vector z{0.8};
  const auto est = conditional_mean_mc(g, f, z, 0.05, 400000, 5);
  const Vector want = conditional_mean(g, f, z);
  CHECK(est.accepted > 1000);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(est.mean[i] - want[i]) < 3 * est.std_error[i]);
}

TEST_CASE("density factorization") {
  const IsotropicGaussian g{{0.3, -0.4}, 1.3};
  const auto p = projector_pair(Matrix{{1, 0}});
  const Matrix e0{{1}, {0}}, e1{{0}, {1}};
  for (const Vector u : {Vector{0.3, -0.4}, Vector{1, 2}, Vector{-3, 0.5}}) {
    const double whole = log_density(g, u);
    const double hand = log_normal_1d(u[0], 0.3, 1.3) + log_normal_1d(u[1], -0.4, 1.3);
    CHECK(std::abs(whole - hand) < 1e-12);
    const double parts = subspace_log_density(g, e0, u) + subspace_log_density(g, e1, u);
    CHECK(std::abs(whole - parts) < 1e-12);
  }
  CHECK(density_factor_check(g, p, 100, 1) < 1e-12);

  const IsotropicGaussian h{{1, 2, 3, -1, 0, 0.5}, 0.8};
  CHECK(density_factor_check(h, projector_pair(random_matrix(2, 6, 3)), 1000, 2) < 1e-8);
}
