#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "auxguide/decomposition.hpp"
#include "auxguide/linalg.hpp"
#include "auxguide/matrix.hpp"
#include "auxguide/synthetic.hpp"

namespace auxguide::diffusion {

/// Linear beta schedule. Timesteps are 1-based: beta[t-1], alpha_bar[t-1].
struct NoiseSchedule {
  std::size_t T = 0;
  Vector beta;
  Vector alpha_bar;

  double alpha_bar_at(std::size_t t) const { return t == 0 ? 1.0 : alpha_bar.at(t - 1); }
};

NoiseSchedule make_schedule(std::size_t T = 1000, double beta_start = 1e-4,
                            double beta_end = 2e-2);

/// u_t = sqrt(abar_t) u0 + sqrt(1 - abar_t) eps. t = 0 returns u0.
Vector forward_diffuse(std::span<const double> u0, std::size_t t, std::span<const double> eps,
                       const NoiseSchedule& sched);

struct GuidanceWeights {
  double w_c = 0.0;
  double w_z = 0.0;
};

void validate(const GuidanceWeights& w);

using Condition = std::optional<synthetic::ConditionLabel>;

/// Noise predictor eps(u_t, t, c). Rows of u_t are independent latent frames;
/// conds holds one entry per row (nullopt = null condition) or is empty for
/// all-null.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual std::size_t width() const = 0;
  virtual Matrix predict(const Matrix& u_t, std::size_t t,
                         std::span<const Condition> conds) const = 0;

  Vector predict_one(std::span<const double> u_t, std::size_t t, const Condition& cond) const;
};

/// Exact noise prediction for Gaussian targets. With one component per
/// condition, the null condition uses the weighted mixture.
class AnalyticGaussianDenoiser : public Denoiser {
 public:
  AnalyticGaussianDenoiser(NoiseSchedule sched, decomposition::IsotropicGaussian target);
  AnalyticGaussianDenoiser(NoiseSchedule sched,
                           std::vector<synthetic::ConditionLabel> labels,
                           std::vector<decomposition::IsotropicGaussian> components,
                           Vector weights);

  std::size_t width() const override { return components_.front().dim(); }
  Matrix predict(const Matrix& u_t, std::size_t t,
                 std::span<const Condition> conds) const override;

 private:
  Vector eps_row(std::span<const double> u, std::size_t t, const Condition& cond) const;

  NoiseSchedule sched_;
  std::vector<synthetic::ConditionLabel> labels_;
  std::vector<decomposition::IsotropicGaussian> components_;
  Vector weights_;
};

/// eps*(u_t) = sqrt(1 - abar) (u_t - sqrt(abar) mu) / (abar sigma^2 + 1 - abar).
Vector analytic_eps(const AnalyticGaussianDenoiser& d, std::span<const double> u_t,
                    std::size_t t, const Condition& cond);

/// eps_u + w_z P_par eps_u + w_c (eps_c - eps_u), one latent frame.
Vector combine_guidance(std::span<const double> eps_uncond, std::span<const double> eps_cond,
                        const linalg::ProjectorPair& proj, const GuidanceWeights& w);
/// Row-wise over a batch of latent frames.
Matrix combine_guidance(const Matrix& eps_uncond, const Matrix& eps_cond,
                        const linalg::ProjectorPair& proj, const GuidanceWeights& w);

/// Evenly strided 1-based timesteps, ascending; the last one is T.
std::vector<std::size_t> strided_timesteps(std::size_t T, std::size_t steps);

struct SampleConfig {
  std::size_t steps = 50;
  GuidanceWeights weights{};
  std::uint64_t seed = 0;
};

/// Ancestral DDPM reverse loop over `rows` latent frames. Row i draws its
/// noise from its own stream, so results do not depend on batching.
Matrix ddpm_sample(const Denoiser& denoiser, const NoiseSchedule& sched, std::size_t rows,
                   std::span<const Condition> conds, const linalg::ProjectorPair& proj,
                   const SampleConfig& cfg);

struct RepaintConfig {
  std::size_t steps = 50;
  std::size_t jump_length = 0;  // 0 disables resampling jumps
  std::size_t jump_count = 1;   // passes through each jump segment
  GuidanceWeights weights{};
  std::uint64_t seed = 0;
};

/// Positions along the strided timesteps, from `steps` (pure noise) down to
/// 0 (clean). Consecutive entries differ by one: a decrease is a denoising
/// step, an increase a re-noising jump.
std::vector<std::size_t> repaint_schedule(std::size_t steps, std::size_t jump_length,
                                          std::size_t jump_count);

/// Inpaints the channels where mask is false; channels where mask is true
/// are taken from `known` and returned unchanged.
Matrix repaint_inpaint(const Denoiser& denoiser, const NoiseSchedule& sched, const Matrix& known,
                       const std::vector<bool>& mask, std::span<const Condition> conds,
                       const linalg::ProjectorPair& proj, const RepaintConfig& cfg);

}  // namespace auxguide::diffusion
