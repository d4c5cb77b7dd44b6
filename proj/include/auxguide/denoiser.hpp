#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "auxguide/diffusion.hpp"
#include "auxguide/nn.hpp"

namespace auxguide::diffusion {

struct MlpDenoiserConfig {
  std::size_t width = 192;
  std::size_t hidden = 256;
  std::size_t time_dim = 32;
  bool linear_only = false;
  std::size_t T = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
};

/// Sinusoidal embedding of a timestep: dim/2 sines then dim/2 cosines.
Vector time_embedding(std::size_t t, std::size_t dim);

/// One-hot motion class then one-hot camera class; all zeros for null.
inline constexpr std::size_t kConditionWidth =
    synthetic::kNumMotionClasses + synthetic::kNumCameraClasses;

/// Per-frame noise predictor: MLP over [u_t | time embedding | condition]
/// plus the skip term sqrt(1 - abar_t) u_t, which is the exact prediction
/// for standard-normal data; the MLP learns the residual. Works in
/// standardized latent coordinates; `shift` and `scale` record the
/// standardization so callers can map to and from raw latents.
class MlpDenoiser : public Denoiser {
 public:
  MlpDenoiser(MlpDenoiserConfig cfg, std::uint64_t seed);

  const MlpDenoiserConfig& config() const noexcept { return cfg_; }
  const NoiseSchedule& schedule() const noexcept { return sched_; }
  nn::ParamStore& params() noexcept { return params_; }
  const nn::ParamStore& params() const noexcept { return params_; }

  std::size_t width() const override { return cfg_.width; }
  Matrix predict(const Matrix& u_t, std::size_t t,
                 std::span<const Condition> conds) const override;

  struct Batch {
    Matrix u_t;
    std::vector<std::size_t> t;
    std::vector<Condition> conds;
    Matrix eps;  // target noise

    std::size_t size() const noexcept { return u_t.rows(); }
  };

  double loss(const Batch& batch) const;
  double loss_and_grad(const Batch& batch);

  Vector shift;  // raw = shift + scale * standardized
  Vector scale;

  void save(const std::filesystem::path& dir) const;
  static MlpDenoiser load(const std::filesystem::path& dir);

 private:
  void add_skip(Matrix& pred, const Matrix& u_t, std::span<const std::size_t> t) const;
  Matrix inputs(const Matrix& u_t, std::span<const std::size_t> t,
                std::span<const Condition> conds) const;

  MlpDenoiserConfig cfg_;
  NoiseSchedule sched_;
  nn::ParamStore params_;
  nn::Mlp net_;
};

/// Noised training batch for the given latent rows: t uniform in [1, T],
/// eps ~ N(0, I), and each condition replaced by null with probability
/// cond_dropout.
MlpDenoiser::Batch make_denoiser_batch(const Matrix& latents,
                                       const std::vector<synthetic::ConditionLabel>& labels,
                                       std::span<const std::size_t> rows,
                                       const NoiseSchedule& sched, double cond_dropout, Rng& rng);

nn::GradCheckResult grad_check(MlpDenoiser& d, const MlpDenoiser::Batch& batch, double eps,
                               std::size_t samples = 128, std::uint64_t seed = 0,
                               double floor = 1e-6);

struct DenoiserTrainConfig {
  std::size_t iters = 3000;
  std::size_t batch = 128;
  nn::AdamConfig adam{};
  std::uint64_t seed = 0;
  double cond_dropout = 0.1;
  std::size_t log_every = 100;
  std::size_t eval_rows = 2048;
};

/// Minimizes ||eps - eps_theta(u_t, t, c)||^2 over standardized latent rows
/// (one row per latent frame, labels per row). Throws Divergence.
nn::TrainLog train_denoiser(MlpDenoiser& d, const Matrix& latents,
                            const std::vector<synthetic::ConditionLabel>& labels,
                            const DenoiserTrainConfig& cfg);

}  // namespace auxguide::diffusion
