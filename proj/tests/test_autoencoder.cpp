#include <cmath>
#include <filesystem>

#include "auxguide/autoencoder.hpp"
#include "auxguide/linalg.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::autoencoder;
using testutil::error_code_of;

namespace {

Config small_config() {
  Config c;
  c.human_dim = 8;
  c.camera_dim = 4;
  c.framing_dim = 3;
  c.hidden = 16;
  return c;
}

std::vector<dataset::Record> small_set(std::size_t n, std::size_t frames = 16) {
  std::vector<dataset::Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    synthetic::GenConfig cfg;
    cfg.frames = frames;
    cfg.seed = 100 + i;
    cfg.noise_scale = 0.01;
    const auto l = synthetic::ConditionLabel::from_index(i % synthetic::kNumConditions);
    out.push_back(dataset::make_record("r" + std::to_string(i), l, synthetic::generate_pair(l, cfg),
                                       false));
  }
  return out;
}

void zero_params(Autoencoder& ae) {
  for (auto& t : ae.params().tensors()) std::fill(t.value.begin(), t.value.end(), 0.0);
}

double mean_sq(const Matrix& m) {
  double s = 0;
  for (double v : m.data()) s += v * v;
  return s / static_cast<double>(m.data().size());
}

}  // namespace

TEST_CASE("encode shapes and determinism") {
  const auto recs = small_set(1, 64);
  Autoencoder ae(Config{}, 1);
  const auto a = ae.encode(recs[0].human, recs[0].camera);
  CHECK(a.frames() == 16);
  CHECK(a.u.cols() == 192);
  const auto b = ae.encode(recs[0].human, recs[0].camera);
  CHECK(a.u.storage() == b.u.storage());

  const auto dec = ae.decode_all(a.u);
  CHECK(dec.human.frames() == 64);
  CHECK(dec.camera.frames() == 64);
  CHECK(dec.framing.frames() == 64);

  CHECK(error_code_of([&] {
          ae.encode(recs[0].human, features::CameraFeatureSeq(60));
        }) == ErrorCode::ShapeMismatch);
  CHECK(error_code_of([&] { ae.decode_all(Matrix(2, 191)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("zero parameters give zero latents") {
  Autoencoder ae(small_config(), 2);
  zero_params(ae);
  const auto recs = small_set(1);
  const auto zero = ae.encode(features::HumanFeatureSeq(16), features::CameraFeatureSeq(16));
  for (double v : zero.u.data()) CHECK(v == 0.0);
  const auto real = ae.encode(recs[0].human, recs[0].camera);
  for (double v : real.u.data()) CHECK(v == 0.0);
  const auto dec = ae.decode_all(Matrix(4, 12));
  for (double v : dec.human.data()) CHECK(v == 0.0);
}

TEST_CASE("framing map is exactly linear") {
  Autoencoder ae(small_config(), 3);
  const Matrix u = testutil::random_matrix(5, 12, 1), v = testutil::random_matrix(5, 12, 2);
  const Matrix z0 = ae.framing_latent(Matrix(5, 12));
  for (double x : z0.data()) CHECK(x == 0.0);

  const Matrix lhs = ae.framing_latent(u * 2.0 + v * -0.5);
  const Matrix rhs = ae.framing_latent(u) * 2.0 + ae.framing_latent(v) * -0.5;
  CHECK(max_abs_diff(lhs, rhs) < 1e-12);

  // dense mat-vec oracle
  const Matrix f = ae.framing_matrix();
  const Matrix z = ae.framing_latent(u);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0;
      for (std::size_t c = 0; c < 12; ++c) s += f(i, c) * u(r, c);
      CHECK(std::abs(z(r, i) - s) < 1e-12);
    }

  Matrix sel(3, 12);
  for (std::size_t i = 0; i < 3; ++i) sel(i, i) = 1;
  ae.set_framing_matrix(sel);
  const Matrix zs = ae.framing_latent(u);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t i = 0; i < 3; ++i) CHECK(zs(r, i) == u(r, i));
  CHECK(error_code_of([&] { ae.framing_latent(Matrix(1, 11)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("framing map starts with orthonormal rows") {
  Autoencoder ae(Config{}, 4);
  const Matrix f = ae.framing_matrix();
  CHECK(max_abs_diff(f * f.transpose(), Matrix::identity(64)) < 1e-12);
  CHECK(ae.framing_condition_ratio() == doctest::Approx(1.0));
}

TEST_CASE("loss hand cases") {
  const auto recs = small_set(2);
  const auto wins = all_windows(recs, 4);
  CHECK(wins.size() == 8);
  const Batch b = make_batch(recs, wins, 4);
  Autoencoder ae(small_config(), 5);
  zero_params(ae);
  const double want = mean_sq(b.human) + mean_sq(b.camera) + mean_sq(b.framing);
  CHECK(ae.loss(b) == doctest::Approx(want).epsilon(1e-12));
  CHECK(ae.loss(b) >= 0.0);
}

TEST_CASE("loss is invariant to batch order") {
  const auto recs = small_set(3);
  auto wins = all_windows(recs, 4);
  Autoencoder ae(small_config(), 6);
  const double a = ae.loss(make_batch(recs, wins, 4));
  std::reverse(wins.begin(), wins.end());
  CHECK(ae.loss(make_batch(recs, wins, 4)) == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("gradient check") {
  const auto recs = small_set(2);
  const auto wins = all_windows(recs, 4);
  const Batch b = make_batch(recs, wins, 4);

  Autoencoder ae(small_config(), 7);
  const auto r = grad_check(ae, b, 1e-6, 150, 1);
  CHECK(r.checked >= 100);
  CHECK(r.max_rel_error < 1e-4);

  auto lin_cfg = small_config();
  lin_cfg.linear_only = true;
  Autoencoder lin(lin_cfg, 8);
  CHECK(grad_check(lin, b, 1e-3, 150, 2).max_rel_error < 1e-7);

  CHECK(error_code_of([&] { grad_check(ae, b, 1e-2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("training reduces the loss and checkpoints round-trip") {
  const auto recs = small_set(32);
  Autoencoder ae(small_config(), 9);
  TrainConfig tc;
  tc.iters = 200;
  tc.batch = 16;
  tc.adam.lr = 1e-3;
  tc.adam.warmup = 20;
  tc.seed = 3;
  const auto log = train(ae, recs, tc);
  CHECK(log.final_loss < log.initial_loss);

  const auto dir = std::filesystem::temp_directory_path() / "auxguide_test_ae";
  ae.save(dir);
  const auto back = Autoencoder::load(dir);
  CHECK(back.framing_matrix().storage() == ae.framing_matrix().storage());
  const auto lat = ae.encode(recs[0].human, recs[0].camera);
  CHECK(back.encode(recs[0].human, recs[0].camera).u.storage() == lat.u.storage());
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid configs") {
  auto c = small_config();
  c.framing_dim = 13;
  CHECK(error_code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
  c = small_config();
  c.downsample = 0;
  CHECK(error_code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
}
