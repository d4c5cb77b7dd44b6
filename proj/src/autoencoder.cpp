#include "auxguide/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "auxguide/checkpoint.hpp"
#include "auxguide/error.hpp"
#include "auxguide/kernels.hpp"
#include "auxguide/linalg.hpp"
#include "auxguide/rng.hpp"

namespace auxguide::autoencoder {

using features::kCameraWidth;
using features::kFramingWidth;
using features::kHumanWidth;

void validate(const Config& cfg) {
  if (cfg.human_dim == 0 || cfg.camera_dim == 0 || cfg.framing_dim == 0 || cfg.downsample == 0 ||
      cfg.hidden == 0)
    throw Error(ErrorCode::InvalidArgument, "autoencoder dimensions must be positive");
  if (cfg.framing_dim > cfg.latent_dim())
    throw Error(ErrorCode::InvalidArgument, "framing latent wider than the joint latent");
  for (double w : {cfg.weight_human, cfg.weight_camera, cfg.weight_framing})
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "loss weights must be >= 0");
}

std::vector<WindowRef> all_windows(const std::vector<dataset::Record>& records, std::size_t ds) {
  std::vector<WindowRef> out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].frames() % ds != 0)
      throw Error(ErrorCode::ShapeMismatch,
                  "record " + records[r].id + " length is not a multiple of the downsampling factor");
    for (std::size_t w = 0; w < records[r].frames() / ds; ++w) out.push_back({r, w});
  }
  return out;
}

Batch make_batch(const std::vector<dataset::Record>& records, std::span<const WindowRef> windows,
                 std::size_t ds) {
  Batch b;
  const std::size_t n = windows.size();
  b.input = Matrix(n, ds * (kHumanWidth + kCameraWidth));
  b.human = Matrix(n, ds * kHumanWidth);
  b.camera = Matrix(n, ds * kCameraWidth);
  b.framing = Matrix(n, ds * kFramingWidth);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records.at(windows[i].record);
    auto in = b.input.row(i);
    auto hx = b.human.row(i);
    auto cy = b.camera.row(i);
    auto fz = b.framing.row(i);
    for (std::size_t k = 0; k < ds; ++k) {
      const std::size_t f = windows[i].window * ds + k;
      const auto h = rec.human.row(f);
      const auto c = rec.camera.row(f);
      const auto z = rec.framing.row(f);
      std::copy(h.begin(), h.end(), in.begin() + k * (kHumanWidth + kCameraWidth));
      std::copy(c.begin(), c.end(), in.begin() + k * (kHumanWidth + kCameraWidth) + kHumanWidth);
      std::copy(h.begin(), h.end(), hx.begin() + k * kHumanWidth);
      std::copy(c.begin(), c.end(), cy.begin() + k * kCameraWidth);
      std::copy(z.begin(), z.end(), fz.begin() + k * kFramingWidth);
    }
  }
  return b;
}

struct Autoencoder::Forward {
  Matrix u;
  Matrix z;
  Matrix human;
  Matrix camera;
  Matrix framing;
  nn::MlpTape enc, dec_h, dec_c, dec_f;
};

Autoencoder::Autoencoder(Config cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  const auto act = cfg_.linear_only ? nn::Activation::Identity : nn::Activation::Relu;
  const std::size_t ds = cfg_.downsample;
  const std::size_t n = cfg_.latent_dim();
  encoder_ = nn::Mlp(params_, "encoder", {ds * (kHumanWidth + kCameraWidth), cfg_.hidden, n}, act);
  framing_ = params_.add("framing", {cfg_.framing_dim, n});
  decoder_human_ = nn::Mlp(params_, "decoder_human", {n, cfg_.hidden, ds * kHumanWidth}, act);
  decoder_camera_ = nn::Mlp(params_, "decoder_camera", {n, cfg_.hidden, ds * kCameraWidth}, act);
  decoder_framing_ =
      nn::Mlp(params_, "decoder_framing", {cfg_.framing_dim, cfg_.hidden, ds * kFramingWidth}, act);

  Rng rng(seed, {0x6165ULL});
  encoder_.init(params_, rng);
  decoder_human_.init(params_, rng);
  decoder_camera_.init(params_, rng);
  decoder_framing_.init(params_, rng);

  // Orthonormal rows: Gram-Schmidt on Gaussian vectors.
  Matrix f(cfg_.framing_dim, n);
  for (std::size_t r = 0; r < cfg_.framing_dim; ++r) {
    auto row = f.row(r);
    double nrm = 0.0;
    while (nrm < 1e-6) {
      rng.fill_normal(row);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t q = 0; q < r; ++q) {
          const double p = dot(row, f.row(q));
          for (std::size_t c = 0; c < n; ++c) row[c] -= p * f(q, c);
        }
      nrm = norm2(row);
    }
    for (double& v : row) v /= nrm;
  }
  set_framing_matrix(f);
}

Matrix Autoencoder::framing_matrix() const {
  return Matrix(cfg_.framing_dim, cfg_.latent_dim(), params_.at(framing_).value);
}

void Autoencoder::set_framing_matrix(const Matrix& f) {
  if (f.rows() != cfg_.framing_dim || f.cols() != cfg_.latent_dim())
    throw Error(ErrorCode::ShapeMismatch, "framing matrix must be d_z x (d_x + d_y)");
  params_.at(framing_).value.assign(f.data().begin(), f.data().end());
}

LatentSeq Autoencoder::encode(const features::HumanFeatureSeq& human,
                              const features::CameraFeatureSeq& camera) const {
  if (human.frames() != camera.frames())
    throw Error(ErrorCode::ShapeMismatch, "human and camera features differ in length");
  const std::size_t ds = cfg_.downsample;
  if (human.frames() == 0 || human.frames() % ds != 0)
    throw Error(ErrorCode::ShapeMismatch, "frame count must be a positive multiple of " +
                                              std::to_string(ds));
  const std::size_t windows = human.frames() / ds;
  Matrix input(windows, ds * (kHumanWidth + kCameraWidth));
  for (std::size_t w = 0; w < windows; ++w) {
    auto in = input.row(w);
    for (std::size_t k = 0; k < ds; ++k) {
      const auto h = human.row(w * ds + k);
      const auto c = camera.row(w * ds + k);
      std::copy(h.begin(), h.end(), in.begin() + k * (kHumanWidth + kCameraWidth));
      std::copy(c.begin(), c.end(), in.begin() + k * (kHumanWidth + kCameraWidth) + kHumanWidth);
    }
  }
  return LatentSeq{encoder_.forward(params_, input), cfg_.human_dim, cfg_.camera_dim};
}

Matrix Autoencoder::framing_latent(const Matrix& u) const {
  if (u.cols() != cfg_.latent_dim())
    throw Error(ErrorCode::ShapeMismatch, "latent width does not match d_x + d_y");
  Matrix z(u.rows(), cfg_.framing_dim);
  kernels::matmul_nt(u.data(), params_.at(framing_).value, z.data(), u.rows(), cfg_.latent_dim(),
                     cfg_.framing_dim);
  return z;
}

namespace {

template <std::size_t W>
features::FeatureSeq<W> unfold(const Matrix& m, std::size_t ds) {
  std::vector<double> data(m.data().begin(), m.data().end());
  return features::FeatureSeq<W>(m.rows() * ds, std::move(data));
}

}  // namespace

Decoded Autoencoder::decode_all(const Matrix& u) const {
  if (u.cols() != cfg_.latent_dim())
    throw Error(ErrorCode::ShapeMismatch, "latent width does not match d_x + d_y");
  const std::size_t ds = cfg_.downsample;
  return Decoded{unfold<kHumanWidth>(decoder_human_.forward(params_, u), ds),
                 unfold<kCameraWidth>(decoder_camera_.forward(params_, u), ds),
                 unfold<kFramingWidth>(decoder_framing_.forward(params_, framing_latent(u)), ds)};
}

Autoencoder::Forward Autoencoder::run(const Batch& batch, bool keep_tape) const {
  Forward fw;
  fw.u = encoder_.forward(params_, batch.input, keep_tape ? &fw.enc : nullptr);
  fw.z = framing_latent(fw.u);
  fw.human = decoder_human_.forward(params_, fw.u, keep_tape ? &fw.dec_h : nullptr);
  fw.camera = decoder_camera_.forward(params_, fw.u, keep_tape ? &fw.dec_c : nullptr);
  fw.framing = decoder_framing_.forward(params_, fw.z, keep_tape ? &fw.dec_f : nullptr);
  return fw;
}

double Autoencoder::loss(const Batch& batch) const {
  const Forward fw = run(batch, false);
  return nn::mse(fw.human, batch.human, cfg_.weight_human, nullptr) +
         nn::mse(fw.camera, batch.camera, cfg_.weight_camera, nullptr) +
         nn::mse(fw.framing, batch.framing, cfg_.weight_framing, nullptr);
}

double Autoencoder::loss_and_grad(const Batch& batch) {
  params_.zero_grad();
  Forward fw = run(batch, true);
  Matrix gh, gc, gf;
  const double loss = nn::mse(fw.human, batch.human, cfg_.weight_human, &gh) +
                      nn::mse(fw.camera, batch.camera, cfg_.weight_camera, &gc) +
                      nn::mse(fw.framing, batch.framing, cfg_.weight_framing, &gf);

  Matrix du = decoder_human_.backward(params_, fw.dec_h, gh, true);
  du += decoder_camera_.backward(params_, fw.dec_c, gc, true);
  const Matrix dz = decoder_framing_.backward(params_, fw.dec_f, gf, true);

  // z = u F^T: dF = dz^T u, du += dz F.
  const std::size_t n = cfg_.latent_dim();
  const std::size_t dzw = cfg_.framing_dim;
  std::vector<double> df(dzw * n);
  kernels::matmul_tn(dz.data(), fw.u.data(), df, batch.size(), dzw, n);
  auto& gframe = params_.at(framing_).grad;
  for (std::size_t i = 0; i < df.size(); ++i) gframe[i] += df[i];
  Matrix du_z(batch.size(), n);
  kernels::matmul(dz.data(), params_.at(framing_).value, du_z.data(), batch.size(), dzw, n);
  du += du_z;

  encoder_.backward(params_, fw.enc, du, false);
  return loss;
}

double Autoencoder::framing_condition_ratio() const {
  const auto svd = linalg::svd_thin(framing_matrix());
  const double smax = svd.singular_values.front();
  return smax > 0.0 ? svd.singular_values.back() / smax : 0.0;
}

void Autoencoder::save(const std::filesystem::path& dir) const {
  checkpoint::Checkpoint ckpt;
  ckpt.kind = "autoencoder";
  ckpt.config["human_dim"] = cfg_.human_dim;
  ckpt.config["camera_dim"] = cfg_.camera_dim;
  ckpt.config["framing_dim"] = cfg_.framing_dim;
  ckpt.config["downsample"] = cfg_.downsample;
  ckpt.config["hidden"] = cfg_.hidden;
  ckpt.config["linear_only"] = cfg_.linear_only;
  ckpt.config["weight_human"] = cfg_.weight_human;
  ckpt.config["weight_camera"] = cfg_.weight_camera;
  ckpt.config["weight_framing"] = cfg_.weight_framing;
  ckpt.tensors = params_.tensors();
  checkpoint::save(dir, ckpt);
}

Autoencoder Autoencoder::load(const std::filesystem::path& dir) {
  const auto ckpt = checkpoint::load(dir);
  if (ckpt.kind != "autoencoder")
    throw Error(ErrorCode::ParseError, dir.string() + " is not an autoencoder checkpoint");
  Config cfg;
  try {
    const auto& c = ckpt.config;
    cfg.human_dim = c.at("human_dim").get<std::size_t>();
    cfg.camera_dim = c.at("camera_dim").get<std::size_t>();
    cfg.framing_dim = c.at("framing_dim").get<std::size_t>();
    cfg.downsample = c.at("downsample").get<std::size_t>();
    cfg.hidden = c.at("hidden").get<std::size_t>();
    cfg.linear_only = c.at("linear_only").get<bool>();
    cfg.weight_human = c.at("weight_human").get<double>();
    cfg.weight_camera = c.at("weight_camera").get<double>();
    cfg.weight_framing = c.at("weight_framing").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad autoencoder config: ") + e.what());
  }
  Autoencoder ae(cfg, 0);
  checkpoint::restore_into(ckpt, ae.params_);
  return ae;
}

GradCheckResult grad_check(Autoencoder& ae, const Batch& batch, double eps, std::size_t samples,
                           std::uint64_t seed, double floor) {
  ae.loss_and_grad(batch);
  return nn::grad_check(ae.params(), [&] { return ae.loss(batch); }, eps, samples, seed, floor);
}

TrainLog train(Autoencoder& ae, const std::vector<dataset::Record>& records,
               const TrainConfig& cfg) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "training set is empty");
  const std::size_t ds = ae.config().downsample;
  const auto windows = all_windows(records, ds);
  if (windows.empty()) throw Error(ErrorCode::InvalidArgument, "training set has no windows");

  // Fixed evaluation subset: evenly spaced windows.
  const std::size_t n_eval = std::min(cfg.eval_windows, windows.size());
  std::vector<WindowRef> eval_refs;
  for (std::size_t i = 0; i < n_eval; ++i) eval_refs.push_back(windows[i * windows.size() / n_eval]);
  const Batch eval_batch = make_batch(records, eval_refs, ds);

  TrainLog log;
  log.initial_loss = ae.loss(eval_batch);
  nn::Adam opt(ae.params(), cfg.adam);
  Rng rng(cfg.seed, {0x7472616eULL});
  std::vector<WindowRef> refs(cfg.batch);
  for (std::size_t step = 0; step < cfg.iters; ++step) {
    for (auto& r : refs) r = windows[rng.below(windows.size())];
    const Batch batch = make_batch(records, refs, ds);
    const double loss = ae.loss_and_grad(batch);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::Divergence, "autoencoder loss became non-finite at step " +
                                             std::to_string(step));
    opt.step(ae.params());
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.iters))
      log.curve.emplace_back(step, loss);
  }
  log.final_loss = ae.loss(eval_batch);
  if (!std::isfinite(log.final_loss) || !ae.params().all_finite())
    throw Error(ErrorCode::Divergence, "autoencoder parameters became non-finite");
  const double ratio = ae.framing_condition_ratio();
  if (ratio < 1e-6)
    log.warnings.push_back("framing map is near rank-deficient (sigma_min/sigma_max = " +
                           std::to_string(ratio) + "); auxiliary sampling will degrade");
  return log;
}

}  // namespace auxguide::autoencoder
