#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "auxguide/features.hpp"
#include "auxguide/matrix.hpp"

namespace auxguide::metrics {

struct GaussianStats {
  Vector mean;
  Matrix cov;
  std::size_t n = 0;
};

/// Sample mean and unbiased covariance of the rows of `samples`.
GaussianStats fit_gaussian(const Matrix& samples);

/// Squared Frechet distance ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)),
/// with the cross term computed as sqrt(sqrt(S_a) S_b sqrt(S_a)).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct Prdc {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
};

/// k-nearest-neighbour precision, recall, density and coverage. Rows are
/// points. A point lies inside a ball when its distance is strictly below
/// the ball radius (distance to the centre's k-th nearest neighbour, self
/// excluded).
Prdc prdc(const Matrix& real, const Matrix& gen, std::size_t k = 5);

/// Fraction of frames, pooled over all sequences, in which none of the nine
/// framing joints is on-screen. `behind` optionally flags, per sequence and
/// frame, joints behind the camera (index f * 9 + j); such joints count as
/// off-screen.
double out_rate(std::span<const features::FramingFeatureSeq> framing,
                std::span<const std::vector<bool>> behind = {});

/// Behind-camera flags for out_rate, computed from world trajectories.
std::vector<bool> behind_camera_flags(const features::TrajectoryPair& traj);

/// Per-frame framing vectors of all sequences stacked as rows.
Matrix stack_frames(std::span<const features::FramingFeatureSeq> framing);

/// FD between per-frame framing vectors of two sets of feature sequences.
double framing_fd(std::span<const features::FramingFeatureSeq> gen,
                  std::span<const features::FramingFeatureSeq> ref);
/// Same, building the framing features from world trajectories first.
double framing_fd(std::span<const features::TrajectoryPair> gen,
                  std::span<const features::TrajectoryPair> ref);

/// Per-sequence descriptor: per-column mean then per-column standard
/// deviation over time.
template <std::size_t W>
Vector sequence_descriptor(const features::FeatureSeq<W>& seq) {
  Vector d(2 * W, 0.0);
  const double f = static_cast<double>(seq.frames());
  for (std::size_t r = 0; r < seq.frames(); ++r)
    for (std::size_t c = 0; c < W; ++c) d[c] += seq.row(r)[c] / f;
  for (std::size_t r = 0; r < seq.frames(); ++r)
    for (std::size_t c = 0; c < W; ++c) {
      const double e = seq.row(r)[c] - d[c];
      d[W + c] += e * e / f;
    }
  for (std::size_t c = 0; c < W; ++c) d[W + c] = std::sqrt(d[W + c]);
  return d;
}

}  // namespace auxguide::metrics
