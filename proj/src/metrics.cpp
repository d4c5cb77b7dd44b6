#include "auxguide/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "auxguide/error.hpp"
#include "auxguide/kernels.hpp"
#include "auxguide/linalg.hpp"

namespace auxguide::metrics {

GaussianStats fit_gaussian(const Matrix& samples) {
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "fit_gaussian needs at least two samples");
  GaussianStats s{Vector(d, 0.0), Matrix(d, d), n};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += samples(r, c);
  for (double& m : s.mean) m /= static_cast<double>(n);
  Vector e(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) e[c] = samples(r, c) - s.mean[c];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) s.cov(i, j) += e[i] * e[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      s.cov(i, j) /= static_cast<double>(n - 1);
      s.cov(j, i) = s.cov(i, j);
    }
  return s;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const std::size_t d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || b.cov.rows() != d)
    throw Error(ErrorCode::DimMismatch, "Gaussian statistics differ in dimension");
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }
  const Matrix sa = linalg::sym_sqrt(a.cov);
  Matrix m = sa * b.cov * sa;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));
  const double cross = trace(linalg::sym_sqrt(m));
  return std::max(0.0, mean_term + trace(a.cov) + trace(b.cov) - 2.0 * cross);
}

namespace {

// Squared distance from each row of x to its k-th nearest other row of x.
Vector kth_radius_sq(const Matrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  std::vector<double> d(n * n);
  kernels::pairwise_sq_dist(x.data(), x.data(), d, n, n, x.cols());
  Vector out(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(d[i * n + j]);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    out[i] = row[k - 1];
  }
  return out;
}

}  // namespace

Prdc prdc(const Matrix& real, const Matrix& gen, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "prdc needs k >= 1");
  if (real.rows() < k + 1 || gen.rows() < k + 1)
    throw Error(ErrorCode::TooFewPoints, "prdc needs at least k+1 points in each set");
  if (real.cols() != gen.cols()) throw Error(ErrorCode::DimMismatch, "prdc point dimensions differ");
  const std::size_t nr = real.rows(), ng = gen.rows();
  const Vector real_r = kth_radius_sq(real, k);
  const Vector gen_r = kth_radius_sq(gen, k);
  std::vector<double> d(nr * ng);  // d[i * ng + j] = |real_i - gen_j|^2
  kernels::pairwise_sq_dist(real.data(), gen.data(), d, nr, ng, real.cols());

  std::size_t precise = 0, recalled = 0, covered = 0, hits = 0;
  for (std::size_t j = 0; j < ng; ++j) {
    bool inside = false;
    for (std::size_t i = 0; i < nr; ++i)
      if (d[i * ng + j] < real_r[i]) {
        inside = true;
        ++hits;
      }
    precise += inside;
  }
  for (std::size_t i = 0; i < nr; ++i) {
    bool recall_hit = false;
    double nearest = d[i * ng];
    for (std::size_t j = 0; j < ng; ++j) {
      recall_hit = recall_hit || d[i * ng + j] < gen_r[j];
      nearest = std::min(nearest, d[i * ng + j]);
    }
    recalled += recall_hit;
    covered += nearest < real_r[i];
  }
  Prdc out;
  out.precision = static_cast<double>(precise) / static_cast<double>(ng);
  out.recall = static_cast<double>(recalled) / static_cast<double>(nr);
  out.density = static_cast<double>(hits) / (static_cast<double>(k) * static_cast<double>(ng));
  out.coverage = static_cast<double>(covered) / static_cast<double>(nr);
  return out;
}

double out_rate(std::span<const features::FramingFeatureSeq> framing,
                std::span<const std::vector<bool>> behind) {
  if (!behind.empty() && behind.size() != framing.size())
    throw Error(ErrorCode::LengthMismatch, "need one behind-camera mask per sequence");
  std::size_t total = 0, out = 0;
  for (std::size_t s = 0; s < framing.size(); ++s) {
    const auto& seq = framing[s];
    if (!behind.empty() && behind[s].size() != seq.frames() * geometry::kNumFramingJoints)
      throw Error(ErrorCode::LengthMismatch, "behind-camera mask has the wrong length");
    for (std::size_t f = 0; f < seq.frames(); ++f) {
      const auto row = seq.row(f);
      bool any_visible = false;
      for (std::size_t j = 0; j < geometry::kNumFramingJoints; ++j) {
        const bool back = !behind.empty() && behind[s][f * geometry::kNumFramingJoints + j];
        if (!back && std::abs(row[2 * j]) <= 1.0 && std::abs(row[2 * j + 1]) <= 1.0)
          any_visible = true;
      }
      out += !any_visible;
      ++total;
    }
  }
  if (total == 0) throw Error(ErrorCode::InvalidArgument, "out_rate needs at least one frame");
  return static_cast<double>(out) / static_cast<double>(total);
}

std::vector<bool> behind_camera_flags(const features::TrajectoryPair& traj) {
  std::vector<bool> flags;
  flags.reserve(traj.frames() * geometry::kNumFramingJoints);
  for (std::size_t f = 0; f < traj.frames(); ++f)
    for (std::size_t j : geometry::kFramingJoints)
      flags.push_back(!geometry::project_to_ndc(traj.camera[f], traj.human[f].joints.joints[j]).in_front);
  return flags;
}

Matrix stack_frames(std::span<const features::FramingFeatureSeq> framing) {
  std::size_t rows = 0;
  for (const auto& s : framing) rows += s.frames();
  Matrix out(rows, features::kFramingWidth);
  std::size_t r = 0;
  for (const auto& s : framing)
    for (std::size_t f = 0; f < s.frames(); ++f, ++r) {
      const auto src = s.row(f);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
  return out;
}

double framing_fd(std::span<const features::FramingFeatureSeq> gen,
                  std::span<const features::FramingFeatureSeq> ref) {
  if (gen.empty() || ref.empty())
    throw Error(ErrorCode::InvalidArgument, "framing_fd needs non-empty sets");
  return frechet_distance(fit_gaussian(stack_frames(gen)), fit_gaussian(stack_frames(ref)));
}

double framing_fd(std::span<const features::TrajectoryPair> gen,
                  std::span<const features::TrajectoryPair> ref) {
  std::vector<features::FramingFeatureSeq> g, r;
  for (const auto& t : gen) g.push_back(features::build_framing_features(t));
  for (const auto& t : ref) r.push_back(features::build_framing_features(t));
  return framing_fd(std::span<const features::FramingFeatureSeq>(g),
                    std::span<const features::FramingFeatureSeq>(r));
}

}  // namespace auxguide::metrics
