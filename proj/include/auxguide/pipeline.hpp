#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auxguide/autoencoder.hpp"
#include "auxguide/dataset.hpp"
#include "auxguide/denoiser.hpp"
#include "auxguide/diffusion.hpp"
#include "auxguide/linalg.hpp"
#include "auxguide/metrics.hpp"

namespace auxguide::pipeline {

/// Encoded dataset: one row per latent frame, with the label of its record.
struct LatentSet {
  Matrix rows;
  std::vector<synthetic::ConditionLabel> labels;
};

LatentSet encode_dataset(const autoencoder::Autoencoder& ae,
                         const std::vector<dataset::Record>& records);

/// Per-channel mean and standard deviation (1 where the channel is constant).
void fit_standardization(const Matrix& rows, Vector& shift, Vector& scale);
Matrix standardize(const Matrix& rows, const Vector& shift, const Vector& scale);
Matrix unstandardize(const Matrix& rows, const Vector& shift, const Vector& scale);

/// Projector pair of the framing map in standardized coordinates,
/// i.e. of F_w diag(scale).
linalg::ProjectorPair standardized_projector(const autoencoder::Autoencoder& ae,
                                             const Vector& scale);

struct GenerateConfig {
  std::size_t frames = 64;
  double fps = 30.0;
  diffusion::SampleConfig sample{};
};

/// Samples one sequence per label, decodes it and integrates world
/// trajectories. Record framing features are rebuilt from the integrated
/// trajectories; the raw latent is kept on the record.
std::vector<dataset::Record> generate(const autoencoder::Autoencoder& ae,
                                      const diffusion::MlpDenoiser& denoiser,
                                      const std::vector<synthetic::ConditionLabel>& labels,
                                      const GenerateConfig& cfg);

/// Decoded features -> world trajectory. Fields of view are clamped into
/// [0.05, pi - 0.05] first so every decoded camera is a valid pinhole.
features::TrajectoryPair decoded_to_world(const features::HumanFeatureSeq& human,
                                          features::CameraFeatureSeq camera, double fps);

struct EvalReport {
  std::vector<std::pair<std::string, double>> values;

  double at(const std::string& key) const;
};

/// fd_framing, fd_human, fd_camera, PRDC on per-sequence framing
/// descriptors (k = 5 when both sets are large enough), out_rate of both sets.
EvalReport evaluate(const std::vector<dataset::Record>& generated,
                    const std::vector<dataset::Record>& reference);

std::vector<synthetic::ConditionLabel> labels_of(const std::vector<dataset::Record>& records,
                                                 std::size_t n);

}  // namespace auxguide::pipeline
