#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auxguide/linalg.hpp"
#include "auxguide/matrix.hpp"

namespace auxguide::decomposition {

/// N(mu, sigma^2 I).
struct IsotropicGaussian {
  Vector mu;
  double sigma = 1.0;

  std::size_t dim() const noexcept { return mu.size(); }
};

void validate(const IsotropicGaussian& g);

struct Split {
  Vector perp;  // P_perp u
  Vector par;   // P_par u
};

Split decompose(std::span<const double> u, const linalg::ProjectorPair& proj);

struct BandCheck {
  std::string name;
  double max_deviation = 0.0;
  double band = 0.0;
  bool pass = false;
};

struct CochranReport {
  std::size_t n_samples = 0;
  std::vector<BandCheck> checks;

  bool passed() const;
};

/// Monte Carlo check that P_par u and P_perp u are independent Gaussians with
/// projected means and covariances sigma^2 P. Bands are 5 sigma / sqrt(n)
/// for means and 5 sigma^2 / sqrt(n) for covariances.
CochranReport cochran_check(const IsotropicGaussian& g, const linalg::ProjectorPair& proj,
                            std::size_t n_samples, std::uint64_t seed);

/// E[u | F u = z] = P_perp mu + F^+ z. Requires full row rank F.
Vector conditional_mean(const IsotropicGaussian& g, const Matrix& f, std::span<const double> z);

struct RejectionEstimate {
  Vector mean;
  Vector std_error;
  std::size_t accepted = 0;
};

/// Mean of draws u ~ g with ||F u - z|| < window.
RejectionEstimate conditional_mean_mc(const IsotropicGaussian& g, const Matrix& f,
                                      std::span<const double> z, double window,
                                      std::size_t n_samples, std::uint64_t seed);

/// log N(u; mu, sigma^2 I).
double log_density(const IsotropicGaussian& g, std::span<const double> u);

/// Log density of the component of u in range(basis) under the Gaussian
/// restricted to that subspace, in the coordinates basis^T u.
double subspace_log_density(const IsotropicGaussian& g, const Matrix& basis,
                            std::span<const double> u);

/// Max |log p(u) - (log p_perp(u_perp) + log p_par(u_par))| over seeded points.
double density_factor_check(const IsotropicGaussian& g, const linalg::ProjectorPair& proj,
                            std::size_t n_points, std::uint64_t seed);

}  // namespace auxguide::decomposition
