#include <cmath>

#include "auxguide/pipeline.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::pipeline;
using testutil::error_code_of;

namespace {

autoencoder::Config ae_config() {
  autoencoder::Config c;
  c.human_dim = 8;
  c.camera_dim = 4;
  c.framing_dim = 3;
  c.hidden = 16;
  return c;
}

diffusion::MlpDenoiserConfig dn_config() {
  diffusion::MlpDenoiserConfig c;
  c.width = 12;
  c.hidden = 16;
  c.time_dim = 8;
  c.T = 50;
  return c;
}

std::vector<dataset::Record> records(std::size_t n) {
  std::vector<dataset::Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    synthetic::GenConfig cfg;
    cfg.frames = 16;
    cfg.seed = 30 + i;
    const auto l = synthetic::ConditionLabel::from_index((3 * i) % synthetic::kNumConditions);
    out.push_back(dataset::make_record("r" + std::to_string(i), l, synthetic::generate_pair(l, cfg)));
  }
  return out;
}

}  // namespace

TEST_CASE("standardization") {
  Vector shift, scale;
  fit_standardization(Matrix{{0, 5}, {2, 5}}, shift, scale);
  CHECK(shift == Vector{1, 5});
  CHECK(scale[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(scale[1] == 1.0);

  const Matrix x = testutil::random_matrix(50, 4, 1) * 3.0;
  fit_standardization(x, shift, scale);
  const Matrix z = standardize(x, shift, scale);
  Vector s2, c2;
  fit_standardization(z, s2, c2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(s2[i]) < 1e-12);
    CHECK(c2[i] == doctest::Approx(1.0));
  }
  CHECK(max_abs_diff(unstandardize(z, shift, scale), x) < 1e-12);
  CHECK(error_code_of([&] { fit_standardization(Matrix(1, 3), shift, scale); }) ==
        ErrorCode::TooFewPoints);
}

TEST_CASE("standardized projector") {
  const autoencoder::Autoencoder ae(ae_config(), 1);
  const Vector scale{1, 2, 0.5, 3, 1, 1, 4, 0.25, 1, 2, 1, 1};
  const auto p = standardized_projector(ae, scale);
  Matrix fs = ae.framing_matrix();
  for (std::size_t r = 0; r < fs.rows(); ++r)
    for (std::size_t c = 0; c < fs.cols(); ++c) fs(r, c) *= scale[c];
  CHECK(max_abs_diff(p.parallel, linalg::projector_pair(fs).parallel) < 1e-12);
  // a standardized perturbation in the perpendicular range leaves raw framing untouched
  CHECK(max_abs(fs * p.perpendicular) < 1e-10);
  CHECK(error_code_of([&] { standardized_projector(ae, Vector(3, 1.0)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("decoded fields of view are clamped") {
  const auto recs = records(1);
  auto cam = recs[0].camera;
  cam.at(0, features::camera_cols::kFov) = -1.0;
  cam.at(1, features::camera_cols::kFov + 1) = 9.0;
  const auto w = decoded_to_world(recs[0].human, cam, 30.0);
  CHECK(w.camera[0].fov_h == 0.05);
  CHECK(w.camera[1].fov_v == doctest::Approx(3.14159265358979 - 0.05));
  CHECK(w.camera[2].fov_h == recs[0].camera.at(2, features::camera_cols::kFov));
}

TEST_CASE("generation and evaluation") {
  const auto recs = records(6);
  const autoencoder::Autoencoder ae(ae_config(), 2);
  diffusion::MlpDenoiser dn(dn_config(), 3);
  const auto lat = encode_dataset(ae, recs);
  CHECK(lat.rows.rows() == 6 * 4);
  CHECK(lat.labels[5] == recs[1].label);
  fit_standardization(lat.rows, dn.shift, dn.scale);

  GenerateConfig cfg;
  cfg.frames = 16;
  cfg.sample.steps = 10;
  cfg.sample.seed = 4;
  cfg.sample.weights = {2.0, 0.5};
  const auto labels = labels_of(recs, 8);
  CHECK(labels[7] == recs[1].label);
  const auto gen = generate(ae, dn, labels, cfg);
  REQUIRE(gen.size() == 8);
  CHECK(gen[3].id == "gen-3");
  CHECK(gen[3].frames() == 16);
  CHECK(gen[3].latent->rows() == 4);
  CHECK(gen[3].world.has_value());
  CHECK(gen[3].framing == features::build_framing_features(*gen[3].world));
  const auto again = generate(ae, dn, labels, cfg);
  CHECK(again[5].human == gen[5].human);

  cfg.frames = 10;
  CHECK(error_code_of([&] { generate(ae, dn, labels, cfg); }) == ErrorCode::InvalidArgument);

  const auto self = evaluate(recs, recs);
  CHECK(std::abs(self.at("fd_framing")) < 1e-9);
  CHECK(self.at("coverage") == 1.0);
  CHECK(self.at("out_rate") == self.at("out_rate_ref"));
  const auto rep = evaluate(gen, recs);
  for (const char* key : {"fd_framing", "fd_human", "fd_camera", "precision", "recall", "density",
                          "coverage", "out_rate", "out_rate_ref"})
    CHECK(std::isfinite(rep.at(key)));
  CHECK(error_code_of([&] { rep.at("mpjpe"); }) == ErrorCode::InvalidArgument);
}
