#include <cmath>
#include <filesystem>

#include "auxguide/denoiser.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::diffusion;
using testutil::error_code_of;

namespace {

MlpDenoiserConfig small() {
  MlpDenoiserConfig c;
  c.width = 6;
  c.hidden = 24;
  c.time_dim = 8;
  c.T = 100;
  return c;
}

// Two well separated clusters keyed by label.
void toy_latents(std::size_t n, Matrix& x, std::vector<synthetic::ConditionLabel>& labels) {
  x = Matrix(n, 6);
  labels.resize(n);
  Rng rng(5);
  for (std::size_t r = 0; r < n; ++r) {
    labels[r] = synthetic::ConditionLabel::from_index(r % 2 == 0 ? 0 : 7);
    for (std::size_t c = 0; c < 6; ++c) x(r, c) = (r % 2 == 0 ? 1.0 : -1.0) + 0.3 * rng.normal();
  }
}

}  // namespace

TEST_CASE("time embedding") {
  const Vector e = time_embedding(0, 8);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(e[k] == 0.0);
    CHECK(e[4 + k] == 1.0);
  }
  const Vector e5 = time_embedding(5, 8);
  CHECK(e5[0] == doctest::Approx(std::sin(5.0)));
  CHECK(e5[5] == doctest::Approx(std::cos(5.0 * std::pow(10000.0, -0.25))));
}

TEST_CASE("zero network predicts the skip term") {
  MlpDenoiser d(small(), 1);
  for (auto& t : d.params().tensors()) std::fill(t.value.begin(), t.value.end(), 0.0);
  const Matrix u = testutil::random_matrix(3, 6, 2);
  const Matrix p = d.predict(u, 40, {});
  const double c = std::sqrt(1 - d.schedule().alpha_bar_at(40));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t i = 0; i < 6; ++i) CHECK(p(r, i) == doctest::Approx(c * u(r, i)));
}

TEST_CASE("conditions change the prediction") {
  const MlpDenoiser d(small(), 3);
  const Matrix u = testutil::random_matrix(1, 6, 2);
  const std::vector<Condition> a{synthetic::ConditionLabel{}}, none{std::nullopt};
  CHECK(d.predict(u, 10, a).storage() != d.predict(u, 10, none).storage());
  CHECK(d.predict(u, 10, none).storage() == d.predict(u, 10, {}).storage());
  CHECK(error_code_of([&] { d.predict(Matrix(1, 5), 10, {}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("denoiser batches") {
  Matrix x;
  std::vector<synthetic::ConditionLabel> labels;
  toy_latents(20, x, labels);
  const auto s = make_schedule(100);
  const std::vector<std::size_t> rows{0, 3, 4, 19};
  Rng rng(1);
  const auto b = make_denoiser_batch(x, labels, rows, s, 0.0, rng);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(b.t[i] >= 1);
    CHECK(b.t[i] <= 100);
    REQUIRE(b.conds[i].has_value());
    CHECK(*b.conds[i] == labels[rows[i]]);
    const Vector want = forward_diffuse(x.row(rows[i]), b.t[i], b.eps.row(i), s);
    for (std::size_t c = 0; c < 6; ++c) CHECK(b.u_t(i, c) == doctest::Approx(want[c]));
  }
  Rng rng2(1);
  const auto dropped = make_denoiser_batch(x, labels, rows, s, 1.0, rng2);
  for (const auto& c : dropped.conds) CHECK_FALSE(c.has_value());
}

TEST_CASE("denoiser gradient check") {
  Matrix x;
  std::vector<synthetic::ConditionLabel> labels;
  toy_latents(16, x, labels);
  MlpDenoiser d(small(), 4);
  std::vector<std::size_t> rows(16);
  for (std::size_t i = 0; i < 16; ++i) rows[i] = i;
  Rng rng(2);
  const auto b = make_denoiser_batch(x, labels, rows, d.schedule(), 0.3, rng);
  const auto r = grad_check(d, b, 1e-6, 150, 1);
  CHECK(r.checked >= 100);
  CHECK(r.max_rel_error < 1e-4);

  auto lc = small();
  lc.linear_only = true;
  MlpDenoiser lin(lc, 5);
  CHECK(grad_check(lin, b, 1e-3, 150, 2).max_rel_error < 1e-7);
}

TEST_CASE("denoiser training reduces the loss and is deterministic") {
  Matrix x;
  std::vector<synthetic::ConditionLabel> labels;
  toy_latents(256, x, labels);
  DenoiserTrainConfig tc;
  tc.iters = 300;
  tc.batch = 32;
  tc.adam.lr = 1e-3;
  tc.adam.warmup = 20;
  tc.seed = 6;
  tc.eval_rows = 256;

  MlpDenoiser a(small(), 7), b(small(), 7);
  const auto la = train_denoiser(a, x, labels, tc);
  const auto lb = train_denoiser(b, x, labels, tc);
  CHECK(la.final_loss < la.initial_loss);
  CHECK(la.final_loss == lb.final_loss);
  for (std::size_t k = 0; k < a.params().tensors().size(); ++k)
    CHECK(a.params().at(k).value == b.params().at(k).value);

  const auto dir = std::filesystem::temp_directory_path() / "auxguide_test_denoiser";
  a.shift = Vector(6, 0.25);
  a.scale = Vector(6, 2.0);
  a.save(dir);
  const auto back = MlpDenoiser::load(dir);
  CHECK(back.shift == a.shift);
  CHECK(back.scale == a.scale);
  CHECK(back.config().T == 100);
  const Matrix u = testutil::random_matrix(4, 6, 9);
  CHECK(back.predict(u, 33, {}).storage() == a.predict(u, 33, {}).storage());
  std::filesystem::remove_all(dir);
}
