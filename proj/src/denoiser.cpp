#include "auxguide/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "auxguide/checkpoint.hpp"
#include "auxguide/error.hpp"
#include "auxguide/rng.hpp"

namespace auxguide::diffusion {

Vector time_embedding(std::size_t t, std::size_t dim) {
  const std::size_t half = dim / 2;
  Vector e(dim, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    e[k] = std::sin(static_cast<double>(t) * freq);
    e[half + k] = std::cos(static_cast<double>(t) * freq);
  }
  return e;
}

MlpDenoiser::MlpDenoiser(MlpDenoiserConfig cfg, std::uint64_t seed)
    : cfg_(cfg), sched_(make_schedule(cfg.T, cfg.beta_start, cfg.beta_end)) {
  if (cfg_.width == 0 || cfg_.hidden == 0 || cfg_.time_dim == 0 || cfg_.time_dim % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "denoiser sizes must be positive, time_dim even");
  const auto act = cfg_.linear_only ? nn::Activation::Identity : nn::Activation::Relu;
  net_ = nn::Mlp(params_, "net",
                 {cfg_.width + cfg_.time_dim + kConditionWidth, cfg_.hidden, cfg_.hidden, cfg_.width},
                 act);
  Rng rng(seed, {0x646eULL});
  net_.init(params_, rng);
  shift.assign(cfg_.width, 0.0);
  scale.assign(cfg_.width, 1.0);
}

Matrix MlpDenoiser::inputs(const Matrix& u_t, std::span<const std::size_t> t,
                           std::span<const Condition> conds) const {
  if (u_t.cols() != cfg_.width) throw Error(ErrorCode::ShapeMismatch, "denoiser width mismatch");
  if (!conds.empty() && conds.size() != u_t.rows())
    throw Error(ErrorCode::ShapeMismatch, "need one condition per latent row");
  Matrix in(u_t.rows(), cfg_.width + cfg_.time_dim + kConditionWidth);
  std::size_t cached_t = 0;
  Vector emb;
  for (std::size_t r = 0; r < u_t.rows(); ++r) {
    const std::size_t tr = t.size() == 1 ? t[0] : t[r];
    if (tr == 0 || tr > cfg_.T) throw Error(ErrorCode::InvalidArgument, "timestep out of range");
    if (emb.empty() || tr != cached_t) {
      emb = time_embedding(tr, cfg_.time_dim);
      cached_t = tr;
    }
    auto row = in.row(r);
    const auto u = u_t.row(r);
    std::copy(u.begin(), u.end(), row.begin());
    std::copy(emb.begin(), emb.end(), row.begin() + cfg_.width);
    if (!conds.empty() && conds[r]) {
      const std::size_t base = cfg_.width + cfg_.time_dim;
      row[base + static_cast<std::size_t>(conds[r]->motion)] = 1.0;
      row[base + synthetic::kNumMotionClasses + static_cast<std::size_t>(conds[r]->camera)] = 1.0;
    }
  }
  return in;
}

void MlpDenoiser::add_skip(Matrix& pred, const Matrix& u_t, std::span<const std::size_t> t) const {
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    const double c = std::sqrt(1.0 - sched_.alpha_bar_at(t.size() == 1 ? t[0] : t[r]));
    auto p = pred.row(r);
    const auto u = u_t.row(r);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += c * u[i];
  }
}

Matrix MlpDenoiser::predict(const Matrix& u_t, std::size_t t,
                            std::span<const Condition> conds) const {
  Matrix pred = net_.forward(params_, inputs(u_t, std::span(&t, 1), conds));
  add_skip(pred, u_t, std::span(&t, 1));
  return pred;
}

double MlpDenoiser::loss(const Batch& batch) const {
  Matrix pred = net_.forward(params_, inputs(batch.u_t, batch.t, batch.conds));
  add_skip(pred, batch.u_t, batch.t);
  return nn::mse(pred, batch.eps, 1.0, nullptr);
}

double MlpDenoiser::loss_and_grad(const Batch& batch) {
  params_.zero_grad();
  nn::MlpTape tape;
  Matrix pred = net_.forward(params_, inputs(batch.u_t, batch.t, batch.conds), &tape);
  add_skip(pred, batch.u_t, batch.t);
  Matrix grad;
  const double l = nn::mse(pred, batch.eps, 1.0, &grad);
  net_.backward(params_, tape, grad, false);
  return l;
}

void MlpDenoiser::save(const std::filesystem::path& dir) const {
  checkpoint::Checkpoint ckpt;
  ckpt.kind = "denoiser";
  ckpt.config["width"] = cfg_.width;
  ckpt.config["hidden"] = cfg_.hidden;
  ckpt.config["time_dim"] = cfg_.time_dim;
  ckpt.config["linear_only"] = cfg_.linear_only;
  ckpt.config["T"] = cfg_.T;
  ckpt.config["beta_start"] = cfg_.beta_start;
  ckpt.config["beta_end"] = cfg_.beta_end;
  ckpt.tensors = params_.tensors();
  ckpt.tensors.push_back({"latent_shift", {cfg_.width}, shift, {}});
  ckpt.tensors.push_back({"latent_scale", {cfg_.width}, scale, {}});
  checkpoint::save(dir, ckpt);
}

MlpDenoiser MlpDenoiser::load(const std::filesystem::path& dir) {
  const auto ckpt = checkpoint::load(dir);
  if (ckpt.kind != "denoiser")
    throw Error(ErrorCode::ParseError, dir.string() + " is not a denoiser checkpoint");
  MlpDenoiserConfig cfg;
  try {
    const auto& c = ckpt.config;
    cfg.width = c.at("width").get<std::size_t>();
    cfg.hidden = c.at("hidden").get<std::size_t>();
    cfg.time_dim = c.at("time_dim").get<std::size_t>();
    cfg.linear_only = c.at("linear_only").get<bool>();
    cfg.T = c.at("T").get<std::size_t>();
    cfg.beta_start = c.at("beta_start").get<double>();
    cfg.beta_end = c.at("beta_end").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad denoiser config: ") + e.what());
  }
  MlpDenoiser d(cfg, 0);
  checkpoint::restore_into(ckpt, d.params_);
  d.shift = ckpt.tensor("latent_shift").value;
  d.scale = ckpt.tensor("latent_scale").value;
  if (d.shift.size() != cfg.width || d.scale.size() != cfg.width)
    throw Error(ErrorCode::ShapeMismatch, "latent standardization has the wrong width");
  return d;
}

MlpDenoiser::Batch make_denoiser_batch(const Matrix& latents,
                                       const std::vector<synthetic::ConditionLabel>& labels,
                                       std::span<const std::size_t> rows,
                                       const NoiseSchedule& sched, double cond_dropout, Rng& rng) {
  if (labels.size() != latents.rows())
    throw Error(ErrorCode::ShapeMismatch, "need one label per latent row");
  const std::size_t n = latents.cols();
  MlpDenoiser::Batch b{Matrix(rows.size(), n), std::vector<std::size_t>(rows.size()),
                       std::vector<Condition>(rows.size()), Matrix(rows.size(), n)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t t = 1 + static_cast<std::size_t>(rng.below(sched.T));
    b.t[i] = t;
    rng.fill_normal(b.eps.row(i));
    const Vector ut = forward_diffuse(latents.row(rows[i]), t, b.eps.row(i), sched);
    std::copy(ut.begin(), ut.end(), b.u_t.row(i).begin());
    if (!(rng.uniform() < cond_dropout)) b.conds[i] = labels[rows[i]];
  }
  return b;
}

nn::GradCheckResult grad_check(MlpDenoiser& d, const MlpDenoiser::Batch& batch, double eps,
                               std::size_t samples, std::uint64_t seed, double floor) {
  d.loss_and_grad(batch);
  return nn::grad_check(d.params(), [&] { return d.loss(batch); }, eps, samples, seed, floor);
}

nn::TrainLog train_denoiser(MlpDenoiser& d, const Matrix& latents,
                            const std::vector<synthetic::ConditionLabel>& labels,
                            const DenoiserTrainConfig& cfg) {
  if (latents.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no latent rows to train on");
  if (latents.cols() != d.width()) throw Error(ErrorCode::ShapeMismatch, "latent width mismatch");
  const std::size_t total = latents.rows();

  std::vector<std::size_t> eval_rows(std::min(cfg.eval_rows, total));
  for (std::size_t i = 0; i < eval_rows.size(); ++i) eval_rows[i] = i * total / eval_rows.size();
  Rng eval_rng(cfg.seed, {0x6576616cULL});
  const auto eval = make_denoiser_batch(latents, labels, eval_rows, d.schedule(), cfg.cond_dropout,
                                        eval_rng);

  nn::TrainLog log;
  log.initial_loss = d.loss(eval);
  nn::Adam opt(d.params(), cfg.adam);
  Rng rng(cfg.seed, {0x646e7472ULL});
  std::vector<std::size_t> rows(cfg.batch);
  for (std::size_t step = 0; step < cfg.iters; ++step) {
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(total));
    const auto batch = make_denoiser_batch(latents, labels, rows, d.schedule(), cfg.cond_dropout, rng);
    const double l = d.loss_and_grad(batch);
    if (!std::isfinite(l))
      throw Error(ErrorCode::Divergence,
                  "denoiser loss became non-finite at step " + std::to_string(step));
    opt.step(d.params());
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.iters))
      log.curve.emplace_back(step, l);
  }
  log.final_loss = d.loss(eval);
  if (!std::isfinite(log.final_loss) || !d.params().all_finite())
    throw Error(ErrorCode::Divergence, "denoiser parameters became non-finite");
  return log;
}

}  // namespace auxguide::diffusion
