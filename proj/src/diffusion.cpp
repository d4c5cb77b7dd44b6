#include "auxguide/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "auxguide/error.hpp"
#include "auxguide/rng.hpp"

namespace auxguide::diffusion {

namespace {

void check_t(const NoiseSchedule& sched, std::size_t t) {
  if (t == 0 || t > sched.T)
    throw Error(ErrorCode::InvalidArgument,
                "timestep " + std::to_string(t) + " outside [1, " + std::to_string(sched.T) + "]");
}

void check_conds(std::span<const Condition> conds, std::size_t rows) {
  if (!conds.empty() && conds.size() != rows)
    throw Error(ErrorCode::ShapeMismatch, "need one condition per latent row");
}

// One ancestral step from abar_t to abar_prev given the predicted noise.
// When `noise` is empty the step is deterministic (used for the final step).
void reverse_step(std::span<double> u, std::span<const double> eps, double ab, double ab_prev,
                  Rng* noise) {
  const double beta = 1.0 - ab / ab_prev;
  const double coef_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
  const double coef_u = std::sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab);
  const double sd = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
  const double s_ab = std::sqrt(ab);
  const double s_1mab = std::sqrt(1.0 - ab);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x0 = (u[i] - s_1mab * eps[i]) / s_ab;
    u[i] = coef_x0 * x0 + coef_u * u[i];
  }
  if (noise)
    for (double& v : u) v += sd * noise->normal();
}

Matrix guided_eps(const Denoiser& d, const Matrix& u, std::size_t t,
                  std::span<const Condition> conds, const linalg::ProjectorPair& proj,
                  const GuidanceWeights& w) {
  const Matrix eps_u = d.predict(u, t, {});
  if (w.w_c == 0.0) return combine_guidance(eps_u, eps_u, proj, w);
  const Matrix eps_c = d.predict(u, t, conds);
  return combine_guidance(eps_u, eps_c, proj, w);
}

std::vector<Rng> row_streams(std::uint64_t seed, std::uint64_t tag, std::size_t rows) {
  std::vector<Rng> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.emplace_back(seed, std::initializer_list<std::uint64_t>{tag, i});
  return out;
}

}  // namespace

NoiseSchedule make_schedule(std::size_t T, double beta_start, double beta_end) {
  if (T == 0) throw Error(ErrorCode::InvalidArgument, "schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw Error(ErrorCode::InvalidArgument, "need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    s.beta[i] = beta_start + frac * (beta_end - beta_start);
    prod *= 1.0 - s.beta[i];
    s.alpha_bar[i] = prod;
  }
  return s;
}

Vector forward_diffuse(std::span<const double> u0, std::size_t t, std::span<const double> eps,
                       const NoiseSchedule& sched) {
  if (u0.size() != eps.size()) throw Error(ErrorCode::ShapeMismatch, "noise width mismatch");
  if (t > sched.T) check_t(sched, t);
  Vector out(u0.begin(), u0.end());
  if (t == 0) return out;
  const double ab = sched.alpha_bar_at(t);
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u0[i] + b * eps[i];
  return out;
}

void validate(const GuidanceWeights& w) {
  if (!std::isfinite(w.w_c) || !std::isfinite(w.w_z) || w.w_c < 0.0 || w.w_z < 0.0)
    throw Error(ErrorCode::InvalidArgument, "guidance weights must be finite and >= 0");
}

Vector Denoiser::predict_one(std::span<const double> u_t, std::size_t t,
                             const Condition& cond) const {
  Matrix u(1, u_t.size(), Vector(u_t.begin(), u_t.end()));
  const Matrix e = predict(u, t, std::span<const Condition>(&cond, 1));
  return Vector(e.data().begin(), e.data().end());
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(NoiseSchedule sched,
                                                   decomposition::IsotropicGaussian target)
    : sched_(std::move(sched)), components_{std::move(target)}, weights_{1.0} {
  decomposition::validate(components_.front());
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(
    NoiseSchedule sched, std::vector<synthetic::ConditionLabel> labels,
    std::vector<decomposition::IsotropicGaussian> components, Vector weights)
    : sched_(std::move(sched)),
      labels_(std::move(labels)),
      components_(std::move(components)),
      weights_(std::move(weights)) {
  if (components_.empty() || labels_.size() != components_.size() ||
      weights_.size() != components_.size())
    throw Error(ErrorCode::InvalidArgument, "need one label and weight per component");
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    decomposition::validate(components_[k]);
    if (components_[k].dim() != components_.front().dim())
      throw Error(ErrorCode::ShapeMismatch, "mixture components differ in dimension");
    if (!(weights_[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    total += weights_[k];
  }
  for (double& w : weights_) w /= total;
}

Vector AnalyticGaussianDenoiser::eps_row(std::span<const double> u, std::size_t t,
                                         const Condition& cond) const {
  const double ab = sched_.alpha_bar_at(t);
  const double s_ab = std::sqrt(ab), s_1mab = std::sqrt(1.0 - ab);
  const std::size_t n = u.size();
  auto single = [&](const decomposition::IsotropicGaussian& g) {
    const double var = ab * g.sigma * g.sigma + 1.0 - ab;
    Vector e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = s_1mab * (u[i] - s_ab * g.mu[i]) / var;
    return e;
  };
  if (labels_.empty()) return single(components_.front());
  if (cond) {
    for (std::size_t k = 0; k < labels_.size(); ++k)
      if (labels_[k] == *cond) return single(components_[k]);
    throw Error(ErrorCode::InvalidArgument, "no component for condition " + synthetic::to_string(*cond));
  }
  // Null condition: posterior-weighted mixture of component predictions.
  Vector logw(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& g = components_[k];
    const double var = ab * g.sigma * g.sigma + 1.0 - ab;
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = u[i] - s_ab * g.mu[i];
      q += d * d;
    }
    logw[k] = std::log(weights_[k]) - 0.5 * static_cast<double>(n) * std::log(var) - 0.5 * q / var;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double& l : logw) z += (l = std::exp(l - top));
  Vector e(n, 0.0);
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const Vector ek = single(components_[k]);
    for (std::size_t i = 0; i < n; ++i) e[i] += logw[k] / z * ek[i];
  }
  return e;
}

Matrix AnalyticGaussianDenoiser::predict(const Matrix& u_t, std::size_t t,
                                         std::span<const Condition> conds) const {
  check_t(sched_, t);
  if (u_t.cols() != width()) throw Error(ErrorCode::ShapeMismatch, "denoiser width mismatch");
  check_conds(conds, u_t.rows());
  Matrix out(u_t.rows(), u_t.cols());
  for (std::size_t r = 0; r < u_t.rows(); ++r) {
    const Vector e = eps_row(u_t.row(r), t, conds.empty() ? Condition{} : conds[r]);
    std::copy(e.begin(), e.end(), out.row(r).begin());
  }
  return out;
}

Vector analytic_eps(const AnalyticGaussianDenoiser& d, std::span<const double> u_t,
                    std::size_t t, const Condition& cond) {
  return d.predict_one(u_t, t, cond);
}

Vector combine_guidance(std::span<const double> eps_uncond, std::span<const double> eps_cond,
                        const linalg::ProjectorPair& proj, const GuidanceWeights& w) {
  const std::size_t n = eps_uncond.size();
  if (eps_cond.size() != n || proj.dim() != n)
    throw Error(ErrorCode::ShapeMismatch, "guidance inputs differ in width");
  Vector out(eps_uncond.begin(), eps_uncond.end());
  // Zero-weight terms are skipped so the reductions to CFG and to the
  // unconditional prediction are exact.
  if (w.w_z != 0.0)
    for (std::size_t i = 0; i < n; ++i) out[i] += w.w_z * dot(proj.parallel.row(i), eps_uncond);
  if (w.w_c != 0.0)
    for (std::size_t i = 0; i < n; ++i) out[i] += w.w_c * (eps_cond[i] - eps_uncond[i]);
  return out;
}

Matrix combine_guidance(const Matrix& eps_uncond, const Matrix& eps_cond,
                        const linalg::ProjectorPair& proj, const GuidanceWeights& w) {
  if (eps_uncond.rows() != eps_cond.rows() || eps_uncond.cols() != eps_cond.cols())
    throw Error(ErrorCode::ShapeMismatch, "guidance inputs differ in shape");
  Matrix out(eps_uncond.rows(), eps_uncond.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const Vector e = combine_guidance(eps_uncond.row(r), eps_cond.row(r), proj, w);
    std::copy(e.begin(), e.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::size_t> strided_timesteps(std::size_t T, std::size_t steps) {
  if (steps == 0 || steps > T)
    throw Error(ErrorCode::InvalidArgument, "sampling steps must lie in [1, T]");
  std::vector<std::size_t> ts(steps);
  for (std::size_t i = 0; i < steps; ++i) ts[i] = (i + 1) * T / steps;
  return ts;
}

Matrix ddpm_sample(const Denoiser& denoiser, const NoiseSchedule& sched, std::size_t rows,
                   std::span<const Condition> conds, const linalg::ProjectorPair& proj,
                   const SampleConfig& cfg) {
  validate(cfg.weights);
  check_conds(conds, rows);
  const std::size_t n = denoiser.width();
  if (proj.dim() != n) throw Error(ErrorCode::ShapeMismatch, "projector width mismatch");
  const auto ts = strided_timesteps(sched.T, cfg.steps);
  auto rngs = row_streams(cfg.seed, 0x646470ULL, rows);
  Matrix u(rows, n);
  for (std::size_t r = 0; r < rows; ++r) rngs[r].fill_normal(u.row(r));
  for (std::size_t k = ts.size(); k-- > 0;) {
    const double ab = sched.alpha_bar_at(ts[k]);
    const double ab_prev = k == 0 ? 1.0 : sched.alpha_bar_at(ts[k - 1]);
    const Matrix eps = guided_eps(denoiser, u, ts[k], conds, proj, cfg.weights);
    for (std::size_t r = 0; r < rows; ++r)
      reverse_step(u.row(r), eps.row(r), ab, ab_prev, k == 0 ? nullptr : &rngs[r]);
  }
  return u;
}

std::vector<std::size_t> repaint_schedule(std::size_t steps, std::size_t jump_length,
                                          std::size_t jump_count) {
  std::vector<std::size_t> out{steps};
  std::map<std::size_t, std::size_t> remaining;
  if (jump_length > 0 && jump_count > 1)
    for (std::size_t k = 0; k + jump_length <= steps; k += jump_length)
      remaining[k] = jump_count - 1;
  std::size_t k = steps;
  while (k > 0) {
    out.push_back(--k);
    auto it = remaining.find(k);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      for (std::size_t j = 0; j < jump_length; ++j) out.push_back(++k);
    }
  }
  return out;
}

Matrix repaint_inpaint(const Denoiser& denoiser, const NoiseSchedule& sched, const Matrix& known,
                       const std::vector<bool>& mask, std::span<const Condition> conds,
                       const linalg::ProjectorPair& proj, const RepaintConfig& cfg) {
  validate(cfg.weights);
  const std::size_t n = denoiser.width();
  const std::size_t rows = known.rows();
  if (known.cols() != n || mask.size() != n || proj.dim() != n)
    throw Error(ErrorCode::ShapeMismatch, "mask, known and denoiser widths differ");
  check_conds(conds, rows);
  const auto ts = strided_timesteps(sched.T, cfg.steps);
  // Position k > 0 sits at timestep ts[k-1]; position 0 is clean.
  auto ab_at = [&](std::size_t k) { return k == 0 ? 1.0 : sched.alpha_bar_at(ts[k - 1]); };
  const auto path = repaint_schedule(cfg.steps, cfg.jump_length, cfg.jump_count);

  auto rngs = row_streams(cfg.seed, 0x646470ULL, rows);
  Matrix u(rows, n);
  for (std::size_t r = 0; r < rows; ++r) rngs[r].fill_normal(u.row(r));
  for (std::size_t p = 1; p < path.size(); ++p) {
    const std::size_t cur = path[p - 1], next = path[p];
    if (next > cur) {
      const double ratio = ab_at(next) / ab_at(cur);
      const double a = std::sqrt(ratio), b = std::sqrt(1.0 - ratio);
      for (std::size_t r = 0; r < rows; ++r)
        for (double& v : u.row(r)) v = a * v + b * rngs[r].normal();
      continue;
    }
    const Matrix eps = guided_eps(denoiser, u, ts[cur - 1], conds, proj, cfg.weights);
    const double ab_next = ab_at(next);
    const double a = std::sqrt(ab_next), b = std::sqrt(1.0 - ab_next);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = u.row(r);
      reverse_step(row, eps.row(r), ab_at(cur), ab_next, next == 0 ? nullptr : &rngs[r]);
      const auto k_row = known.row(r);
      for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        row[i] = next == 0 ? k_row[i] : a * k_row[i] + b * rngs[r].normal();
      }
    }
  }
  return u;
}

}  // namespace auxguide::diffusion
