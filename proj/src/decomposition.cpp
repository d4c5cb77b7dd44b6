#include "auxguide/decomposition.hpp"

#include <cmath>
#include <numbers>

#include "auxguide/error.hpp"
#include "auxguide/rng.hpp"
#include "shards.hpp"

namespace auxguide::decomposition {

namespace {

constexpr std::size_t kShard = 1 << 14;

void check_dim(const IsotropicGaussian& g, const linalg::ProjectorPair& proj) {
  if (proj.dim() != g.dim())
    throw Error(ErrorCode::ShapeMismatch, "projector and Gaussian dimensions differ");
}

// par = P_par u; perp = u - par, so par + perp reproduces u.
void split_into(std::span<const double> u, const Matrix& par_proj, std::span<double> par,
                std::span<double> perp) {
  for (std::size_t i = 0; i < u.size(); ++i) par[i] = dot(par_proj.row(i), u);
  for (std::size_t i = 0; i < u.size(); ++i) perp[i] = u[i] - par[i];
}

struct Moments {
  Vector sum;
  Matrix outer;
  std::size_t count = 0;
};

double max_dev(const Matrix& a, const Matrix& b) { return max_abs_diff(a, b); }

}  // namespace

void validate(const IsotropicGaussian& g) {
  if (g.mu.empty()) throw Error(ErrorCode::InvalidArgument, "Gaussian mean is empty");
  if (!(g.sigma > 0.0) || !std::isfinite(g.sigma))
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive and finite");
  for (double m : g.mu)
    if (!std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "Gaussian mean is not finite");
}

Split decompose(std::span<const double> u, const linalg::ProjectorPair& proj) {
  if (u.size() != proj.dim())
    throw Error(ErrorCode::ShapeMismatch, "vector and projector dimensions differ");
  Split s{Vector(u.size()), Vector(u.size())};
  split_into(u, proj.parallel, s.par, s.perp);
  return s;
}

bool CochranReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

CochranReport cochran_check(const IsotropicGaussian& g, const linalg::ProjectorPair& proj,
                            std::size_t n_samples, std::uint64_t seed) {
  validate(g);
  check_dim(g, proj);
  if (n_samples < 10000) throw Error(ErrorCode::InvalidArgument, "cochran_check needs n >= 1e4");
  const std::size_t n = g.dim();

  // Accumulate w = [par; perp] minus its theoretical mean.
  Vector expect(2 * n);
  {
    const Split m = decompose(g.mu, proj);
    std::copy(m.par.begin(), m.par.end(), expect.begin());
    std::copy(m.perp.begin(), m.perp.end(), expect.begin() + n);
  }
  auto parts = detail::run_shards<Moments>(
      n_samples, kShard, [&](std::size_t shard, std::size_t begin, std::size_t end) {
        Rng rng(seed, {0x636f63ULL, shard});
        Moments m{Vector(2 * n, 0.0), Matrix(2 * n, 2 * n), end - begin};
        Vector u(n), w(2 * n);
        for (std::size_t s = begin; s < end; ++s) {
          for (std::size_t i = 0; i < n; ++i) u[i] = g.mu[i] + g.sigma * rng.normal();
          split_into(u, proj.parallel, std::span(w).first(n), std::span(w).subspan(n));
          for (std::size_t i = 0; i < 2 * n; ++i) w[i] -= expect[i];
          for (std::size_t i = 0; i < 2 * n; ++i) {
            m.sum[i] += w[i];
            auto row = m.outer.row(i);
            for (std::size_t j = 0; j < 2 * n; ++j) row[j] += w[i] * w[j];
          }
        }
        return m;
      });
  Moments total{Vector(2 * n, 0.0), Matrix(2 * n, 2 * n), 0};
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < 2 * n; ++i) total.sum[i] += p.sum[i];
    total.outer += p.outer;
    total.count += p.count;
  }
  const double count = static_cast<double>(total.count);
  Vector mean(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) mean[i] = total.sum[i] / count;
  Matrix cov(2 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j)
      cov(i, j) = (total.outer(i, j) - count * mean[i] * mean[j]) / (count - 1.0);

  auto block = [&](std::size_t r0, std::size_t c0) {
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b(i, j) = cov(r0 + i, c0 + j);
    return b;
  };
  double dev_mean_par = 0.0, dev_mean_perp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev_mean_par = std::max(dev_mean_par, std::abs(mean[i]));
    dev_mean_perp = std::max(dev_mean_perp, std::abs(mean[n + i]));
  }
  const double s2 = g.sigma * g.sigma;
  const double root_n = std::sqrt(count);
  const double mean_band = 5.0 * g.sigma / root_n;
  const double cov_band = 5.0 * s2 / root_n;

  CochranReport rep;
  rep.n_samples = n_samples;
  auto add = [&](std::string name, double dev, double band) {
    rep.checks.push_back({std::move(name), dev, band, dev < band});
  };
  add("mean(u_par) - P_par mu", dev_mean_par, mean_band);
  add("mean(u_perp) - P_perp mu", dev_mean_perp, mean_band);
  add("cov(u_par) - s^2 P_par", max_dev(block(0, 0), s2 * proj.parallel), cov_band);
  add("cov(u_perp) - s^2 P_perp", max_dev(block(n, n), s2 * proj.perpendicular), cov_band);
  add("cov(u_perp, u_par)", max_abs(block(n, 0)), cov_band);
  return rep;
}

Vector conditional_mean(const IsotropicGaussian& g, const Matrix& f, std::span<const double> z) {
  validate(g);
  if (f.cols() != g.dim() || z.size() != f.rows())
    throw Error(ErrorCode::ShapeMismatch, "conditional_mean dimension mismatch");
  const auto svd = linalg::svd_thin(f);
  if (linalg::numerical_rank(svd, linalg::default_rank_tolerance(f)) < f.rows())
    throw Error(ErrorCode::RankDeficient, "framing map is not full row rank");
  const auto proj = linalg::projector_pair(f);
  Vector out = proj.perpendicular * std::span<const double>(g.mu);
  const Vector lift = linalg::pseudo_inverse(f) * z;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += lift[i];
  return out;
}

RejectionEstimate conditional_mean_mc(const IsotropicGaussian& g, const Matrix& f,
                                      std::span<const double> z, double window,
                                      std::size_t n_samples, std::uint64_t seed) {
  validate(g);
  if (f.cols() != g.dim() || z.size() != f.rows())
    throw Error(ErrorCode::ShapeMismatch, "conditional_mean_mc dimension mismatch");
  const std::size_t n = g.dim();
  struct Acc {
    Vector sum, sq;
    std::size_t count = 0;
  };
  auto parts = detail::run_shards<Acc>(
      n_samples, kShard, [&](std::size_t shard, std::size_t begin, std::size_t end) {
        Rng rng(seed, {0x636d6dULL, shard});
        Acc a{Vector(n, 0.0), Vector(n, 0.0), 0};
        Vector u(n);
        for (std::size_t s = begin; s < end; ++s) {
          for (std::size_t i = 0; i < n; ++i) u[i] = g.mu[i] + g.sigma * rng.normal();
          double r2 = 0.0;
          for (std::size_t k = 0; k < f.rows(); ++k) {
            const double d = dot(f.row(k), u) - z[k];
            r2 += d * d;
          }
          if (r2 >= window * window) continue;
          for (std::size_t i = 0; i < n; ++i) {
            a.sum[i] += u[i];
            a.sq[i] += u[i] * u[i];
          }
          ++a.count;
        }
        return a;
      });
  Acc total{Vector(n, 0.0), Vector(n, 0.0), 0};
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < n; ++i) {
      total.sum[i] += p.sum[i];
      total.sq[i] += p.sq[i];
    }
    total.count += p.count;
  }
  if (total.count < 2)
    throw Error(ErrorCode::InvalidArgument, "too few accepted samples; widen the window");
  RejectionEstimate est{Vector(n), Vector(n), total.count};
  const double c = static_cast<double>(total.count);
  for (std::size_t i = 0; i < n; ++i) {
    est.mean[i] = total.sum[i] / c;
    const double var = std::max(0.0, (total.sq[i] - c * est.mean[i] * est.mean[i]) / (c - 1.0));
    est.std_error[i] = std::sqrt(var / c);
  }
  return est;
}

double log_density(const IsotropicGaussian& g, std::span<const double> u) {
  if (u.size() != g.dim()) throw Error(ErrorCode::ShapeMismatch, "log_density dimension mismatch");
  double q = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - g.mu[i];
    q += d * d;
  }
  const double n = static_cast<double>(u.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * g.sigma * g.sigma) -
         q / (2.0 * g.sigma * g.sigma);
}

double subspace_log_density(const IsotropicGaussian& g, const Matrix& basis,
                            std::span<const double> u) {
  if (basis.rows() != g.dim() || u.size() != g.dim())
    throw Error(ErrorCode::ShapeMismatch, "subspace_log_density dimension mismatch");
  const std::size_t r = basis.cols();
  double q = 0.0;
  for (std::size_t c = 0; c < r; ++c) {
    double a = 0.0, m = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      a += basis(i, c) * u[i];
      m += basis(i, c) * g.mu[i];
    }
    q += (a - m) * (a - m);
  }
  return -0.5 * static_cast<double>(r) * std::log(2.0 * std::numbers::pi * g.sigma * g.sigma) -
         q / (2.0 * g.sigma * g.sigma);
}

double density_factor_check(const IsotropicGaussian& g, const linalg::ProjectorPair& proj,
                            std::size_t n_points, std::uint64_t seed) {
  validate(g);
  check_dim(g, proj);
  const Matrix par_basis = linalg::projector_basis(proj.parallel);
  const Matrix perp_basis = linalg::projector_basis(proj.perpendicular);
  Rng rng(seed, {0x646663ULL});
  double worst = 0.0;
  Vector u(g.dim());
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t i = 0; i < g.dim(); ++i) u[i] = g.mu[i] + 2.0 * g.sigma * rng.normal();
    const Split s = decompose(u, proj);
    const double joint = log_density(g, u);
    const double split =
        subspace_log_density(g, perp_basis, s.perp) + subspace_log_density(g, par_basis, s.par);
    worst = std::max(worst, std::abs(joint - split));
  }
  return worst;
}

}  // namespace auxguide::decomposition
