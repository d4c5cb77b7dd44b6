#include "auxguide/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "auxguide/error.hpp"

namespace auxguide::pipeline {

LatentSet encode_dataset(const autoencoder::Autoencoder& ae,
                         const std::vector<dataset::Record>& records) {
  LatentSet out;
  std::vector<double> data;
  std::size_t rows = 0;
  for (const auto& rec : records) {
    const auto lat = ae.encode(rec.human, rec.camera);
    data.insert(data.end(), lat.u.data().begin(), lat.u.data().end());
    rows += lat.frames();
    out.labels.insert(out.labels.end(), lat.frames(), rec.label);
  }
  out.rows = Matrix(rows, ae.config().latent_dim(), std::move(data));
  return out;
}

void fit_standardization(const Matrix& rows, Vector& shift, Vector& scale) {
  const std::size_t n = rows.rows(), d = rows.cols();
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "standardization needs two or more rows");
  shift.assign(d, 0.0);
  scale.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) shift[c] += rows(r, c);
  for (double& s : shift) s /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double e = rows(r, c) - shift[c];
      scale[c] += e * e;
    }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(n - 1));
    if (!(s > 1e-8)) s = 1.0;
  }
}

Matrix standardize(const Matrix& rows, const Vector& shift, const Vector& scale) {
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = (rows(r, c) - shift[c]) / scale[c];
  return out;
}

Matrix unstandardize(const Matrix& rows, const Vector& shift, const Vector& scale) {
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r)
    for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = shift[c] + scale[c] * rows(r, c);
  return out;
}

linalg::ProjectorPair standardized_projector(const autoencoder::Autoencoder& ae,
                                             const Vector& scale) {
  Matrix f = ae.framing_matrix();
  if (scale.size() != f.cols()) throw Error(ErrorCode::ShapeMismatch, "scale width mismatch");
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < f.cols(); ++c) f(r, c) *= scale[c];
  return linalg::projector_pair(f);
}

features::TrajectoryPair decoded_to_world(const features::HumanFeatureSeq& human,
                                          features::CameraFeatureSeq camera, double fps) {
  constexpr double lo = 0.05, hi = std::numbers::pi - 0.05;
  std::vector<double> data(camera.data().begin(), camera.data().end());
  for (std::size_t f = 0; f < camera.frames(); ++f)
    for (std::size_t c = features::camera_cols::kFov; c < features::camera_cols::kFov + 2; ++c) {
      double& v = data[f * features::kCameraWidth + c];
      v = std::clamp(v, lo, hi);
    }
  const features::CameraFeatureSeq clamped(camera.frames(), std::move(data));
  return features::integrate_features(human, clamped, features::RootInit{}, fps);
}

std::vector<dataset::Record> generate(const autoencoder::Autoencoder& ae,
                                      const diffusion::MlpDenoiser& denoiser,
                                      const std::vector<synthetic::ConditionLabel>& labels,
                                      const GenerateConfig& cfg) {
  const std::size_t ds = ae.config().downsample;
  if (cfg.frames == 0 || cfg.frames % ds != 0)
    throw Error(ErrorCode::InvalidArgument,
                "frames must be a positive multiple of " + std::to_string(ds));
  if (denoiser.width() != ae.config().latent_dim())
    throw Error(ErrorCode::ShapeMismatch, "denoiser and autoencoder latent widths differ");
  const std::size_t per = cfg.frames / ds;
  std::vector<diffusion::Condition> conds;
  conds.reserve(labels.size() * per);
  for (const auto& l : labels) conds.insert(conds.end(), per, l);

  const auto proj = standardized_projector(ae, denoiser.scale);
  const Matrix z = diffusion::ddpm_sample(denoiser, denoiser.schedule(), conds.size(), conds, proj,
                                          cfg.sample);
  const Matrix u = unstandardize(z, denoiser.shift, denoiser.scale);

  std::vector<dataset::Record> out;
  out.reserve(labels.size());
  const std::size_t n = u.cols();
  for (std::size_t s = 0; s < labels.size(); ++s) {
    Matrix lat(per, n);
    for (std::size_t r = 0; r < per; ++r) {
      const auto src = u.row(s * per + r);
      std::copy(src.begin(), src.end(), lat.row(r).begin());
    }
    auto dec = ae.decode_all(lat);
    auto world = decoded_to_world(dec.human, dec.camera, cfg.fps);
    dataset::Record rec;
    rec.id = "gen-" + std::to_string(s);
    rec.fps = cfg.fps;
    rec.label = labels[s];
    rec.framing = features::build_framing_features(world);
    rec.human = std::move(dec.human);
    rec.camera = std::move(dec.camera);
    rec.world = std::move(world);
    rec.latent = std::move(lat);
    out.push_back(std::move(rec));
  }
  return out;
}

double EvalReport::at(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw Error(ErrorCode::InvalidArgument, "report has no metric " + key);
}

namespace {

template <class Get>
Matrix stack(const std::vector<dataset::Record>& recs, std::size_t width, Get get) {
  std::size_t rows = 0;
  for (const auto& r : recs) rows += r.frames();
  Matrix out(rows, width);
  std::size_t i = 0;
  for (const auto& r : recs) {
    const auto& seq = get(r);
    for (std::size_t f = 0; f < seq.frames(); ++f, ++i) {
      const auto src = seq.row(f);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
  }
  return out;
}

Matrix descriptors(const std::vector<dataset::Record>& recs) {
  Matrix out(recs.size(), 2 * features::kFramingWidth);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Vector d = metrics::sequence_descriptor(recs[i].framing);
    std::copy(d.begin(), d.end(), out.row(i).begin());
  }
  return out;
}

double rate(const std::vector<dataset::Record>& recs) {
  std::vector<features::FramingFeatureSeq> framing;
  std::vector<std::vector<bool>> behind;
  bool all_world = true;
  for (const auto& r : recs) {
    framing.push_back(r.framing);
    all_world = all_world && r.world.has_value();
    if (r.world) behind.push_back(metrics::behind_camera_flags(*r.world));
  }
  if (!all_world) behind.clear();
  return metrics::out_rate(framing, behind);
}

}  // namespace

EvalReport evaluate(const std::vector<dataset::Record>& generated,
                    const std::vector<dataset::Record>& reference) {
  if (generated.empty() || reference.empty())
    throw Error(ErrorCode::InvalidArgument, "evaluation needs non-empty sample and reference sets");
  using metrics::fit_gaussian;
  using metrics::frechet_distance;
  EvalReport rep;
  auto fd = [&](std::size_t width, auto get) {
    return frechet_distance(fit_gaussian(stack(generated, width, get)),
                            fit_gaussian(stack(reference, width, get)));
  };
  rep.values.emplace_back("fd_framing", fd(features::kFramingWidth,
                                           [](const dataset::Record& r) -> const auto& { return r.framing; }));
  rep.values.emplace_back("fd_human", fd(features::kHumanWidth,
                                         [](const dataset::Record& r) -> const auto& { return r.human; }));
  rep.values.emplace_back("fd_camera", fd(features::kCameraWidth,
                                          [](const dataset::Record& r) -> const auto& { return r.camera; }));
  const std::size_t k = std::min<std::size_t>(5, std::min(generated.size(), reference.size()) - 1);
  if (k >= 1) {
    const auto p = metrics::prdc(descriptors(reference), descriptors(generated), k);
    rep.values.emplace_back("precision", p.precision);
    rep.values.emplace_back("recall", p.recall);
    rep.values.emplace_back("density", p.density);
    rep.values.emplace_back("coverage", p.coverage);
  }
  rep.values.emplace_back("out_rate", rate(generated));
  rep.values.emplace_back("out_rate_ref", rate(reference));
  return rep;
}

std::vector<synthetic::ConditionLabel> labels_of(const std::vector<dataset::Record>& records,
                                                 std::size_t n) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "no records to take labels from");
  std::vector<synthetic::ConditionLabel> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = records[i % records.size()].label;
  return out;
}

}  // namespace auxguide::pipeline
