#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "auxguide/dataset.hpp"
#include "auxguide/features.hpp"
#include "auxguide/matrix.hpp"
#include "auxguide/nn.hpp"

namespace auxguide::autoencoder {

struct Config {
  std::size_t human_dim = 128;   // d_x
  std::size_t camera_dim = 64;   // d_y
  std::size_t framing_dim = 64;  // d_z
  std::size_t downsample = 4;    // frames folded into one latent frame
  std::size_t hidden = 256;
  bool linear_only = false;      // drop ReLUs (diagnostic / gradient-check config)
  double weight_human = 1.0;
  double weight_camera = 1.0;
  double weight_framing = 1.0;

  std::size_t latent_dim() const noexcept { return human_dim + camera_dim; }
};

void validate(const Config& cfg);

/// Joint latent sequence: one row per latent frame, columns [x (d_x) | y (d_y)].
struct LatentSeq {
  Matrix u;
  std::size_t human_dim = 0;
  std::size_t camera_dim = 0;

  std::size_t frames() const noexcept { return u.rows(); }
};

struct Decoded {
  features::HumanFeatureSeq human;
  features::CameraFeatureSeq camera;
  features::FramingFeatureSeq framing;
};

/// Training windows: each row is one latent frame's worth of raw frames.
struct Batch {
  Matrix input;     // B x ds*(199+14), per frame [human | camera]
  Matrix human;     // B x ds*199
  Matrix camera;    // B x ds*14
  Matrix framing;   // B x ds*18

  std::size_t size() const noexcept { return input.rows(); }
};

/// Reference to window w (frames [w*ds, (w+1)*ds)) of a record.
struct WindowRef {
  std::size_t record = 0;
  std::size_t window = 0;
};

std::vector<WindowRef> all_windows(const std::vector<dataset::Record>& records, std::size_t ds);
Batch make_batch(const std::vector<dataset::Record>& records, std::span<const WindowRef> windows,
                 std::size_t ds);

/// Joint encoder E, linear framing map F_w (d_z x (d_x+d_y)), and the three
/// independent decoders. D_z only ever sees F_w u, never raw framing.
class Autoencoder {
 public:
  Autoencoder(Config cfg, std::uint64_t seed);

  const Config& config() const noexcept { return cfg_; }
  nn::ParamStore& params() noexcept { return params_; }
  const nn::ParamStore& params() const noexcept { return params_; }

  Matrix framing_matrix() const;
  void set_framing_matrix(const Matrix& f);

  LatentSeq encode(const features::HumanFeatureSeq& human,
                   const features::CameraFeatureSeq& camera) const;
  /// z[f] = F_w u[f] for every latent frame; exactly linear in u.
  Matrix framing_latent(const Matrix& u) const;
  Decoded decode_all(const Matrix& u) const;

  double loss(const Batch& batch) const;
  /// Zeroes gradients, then accumulates dL/dparams for the batch.
  double loss_and_grad(const Batch& batch);

  /// sigma_min / sigma_max of the framing map.
  double framing_condition_ratio() const;

  void save(const std::filesystem::path& dir) const;
  static Autoencoder load(const std::filesystem::path& dir);

 private:
  struct Forward;
  Forward run(const Batch& batch, bool keep_tape) const;

  Config cfg_;
  nn::ParamStore params_;
  nn::Mlp encoder_;
  nn::Mlp decoder_human_;
  nn::Mlp decoder_camera_;
  nn::Mlp decoder_framing_;
  std::size_t framing_ = 0;
};

using GradCheckResult = nn::GradCheckResult;
using TrainLog = nn::TrainLog;

GradCheckResult grad_check(Autoencoder& ae, const Batch& batch, double eps,
                           std::size_t samples = 128, std::uint64_t seed = 0,
                           double floor = 1e-6);

struct TrainConfig {
  std::size_t iters = 2000;
  std::size_t batch = 64;
  nn::AdamConfig adam{};
  std::uint64_t seed = 0;
  std::size_t log_every = 100;
  std::size_t eval_windows = 1024;
};

/// Adam training on all windows of the dataset. Throws Divergence when the
/// loss becomes non-finite.
TrainLog train(Autoencoder& ae, const std::vector<dataset::Record>& records,
               const TrainConfig& cfg);

}  // namespace auxguide::autoencoder
