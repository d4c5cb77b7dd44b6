#include "auxguide/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "auxguide/error.hpp"
#include "auxguide/kernels.hpp"
#include "auxguide/rng.hpp"

namespace auxguide::nn {

std::size_t ParamStore::add(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  tensors_.push_back(Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0),
                            std::vector<double>(n, 0.0)});
  return tensors_.size() - 1;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& t : tensors_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

double& ParamStore::value(std::size_t flat) {
  for (auto& t : tensors_) {
    if (flat < t.size()) return t.value[flat];
    flat -= t.size();
  }
  throw Error(ErrorCode::InvalidArgument, "flat parameter index out of range");
}

double ParamStore::grad(std::size_t flat) const {
  for (const auto& t : tensors_) {
    if (flat < t.size()) return t.grad[flat];
    flat -= t.size();
  }
  throw Error(ErrorCode::InvalidArgument, "flat parameter index out of range");
}

bool ParamStore::all_finite() const {
  for (const auto& t : tensors_)
    for (double v : t.value)
      if (!std::isfinite(v)) return false;
  return true;
}

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out)
    : in_(in), out_(out) {
  weight_ = store.add(name + ".weight", {in, out});
  bias_ = store.add(name + ".bias", {out});
}

void Linear::init(ParamStore& store, Rng& rng, bool relu_gain) const {
  const double limit = relu_gain ? std::sqrt(6.0 / static_cast<double>(in_))
                                 : std::sqrt(6.0 / static_cast<double>(in_ + out_));
  for (double& w : store.at(weight_).value) w = limit * (2.0 * rng.uniform() - 1.0);
  std::fill(store.at(bias_).value.begin(), store.at(bias_).value.end(), 0.0);
}

Matrix Linear::forward(const ParamStore& store, const Matrix& x) const {
  if (x.cols() != in_) throw Error(ErrorCode::ShapeMismatch, "linear layer input width mismatch");
  Matrix y(x.rows(), out_);
  kernels::matmul(x.data(), store.at(weight_).value, y.data(), x.rows(), in_, out_);
  const auto& b = store.at(bias_).value;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < out_; ++c) row[c] += b[c];
  }
  return y;
}

Matrix Linear::backward(ParamStore& store, const Matrix& x, const Matrix& dy, bool want_dx) const {
  std::vector<double> dw(in_ * out_);
  kernels::matmul_tn(x.data(), dy.data(), dw, x.rows(), in_, out_);
  auto& gw = store.at(weight_).grad;
  for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dw[i];
  auto& gb = store.at(bias_).grad;
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    const auto row = dy.row(r);
    for (std::size_t c = 0; c < out_; ++c) gb[c] += row[c];
  }
  if (!want_dx) return {};
  Matrix dx(dy.rows(), in_);
  kernels::matmul_nt(dy.data(), store.at(weight_).value, dx.data(), dy.rows(), out_, in_);
  return dx;
}

Mlp::Mlp(ParamStore& store, const std::string& prefix, const std::vector<std::size_t>& sizes,
         Activation act)
    : act_(act) {
  if (sizes.size() < 2) throw Error(ErrorCode::InvalidArgument, "MLP needs at least two sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    layers_.emplace_back(store, prefix + "." + std::to_string(i), sizes[i], sizes[i + 1]);
}

void Mlp::init(ParamStore& store, Rng& rng) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i].init(store, rng, act_ == Activation::Relu && i + 1 < layers_.size());
}

Matrix Mlp::forward(const ParamStore& store, const Matrix& x, MlpTape* tape) const {
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (tape) tape->inputs.push_back(h);
    Matrix y = layers_[i].forward(store, h);
    if (i + 1 < layers_.size() && act_ == Activation::Relu) {
      if (tape) tape->pre.push_back(y);
      for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
    }
    h = std::move(y);
  }
  return h;
}

Matrix Mlp::backward(ParamStore& store, const MlpTape& tape, const Matrix& dout,
                     bool want_dx) const {
  Matrix grad = dout;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size() && act_ == Activation::Relu) {
      const auto pre = tape.pre[i].data();
      auto g = grad.data();
      for (std::size_t k = 0; k < g.size(); ++k)
        if (!(pre[k] > 0.0)) g[k] = 0.0;
    }
    grad = layers_[i].backward(store, tape.inputs[i], grad, want_dx || i > 0);
  }
  return grad;
}

Adam::Adam(const ParamStore& store, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& t : store.tensors()) {
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  }
}

double Adam::current_lr() const {
  double lr = cfg_.lr;
  if (cfg_.warmup > 0)
    lr *= std::min(1.0, static_cast<double>(t_ + 1) / static_cast<double>(cfg_.warmup));
  if (cfg_.decay_after > 0 && t_ >= cfg_.decay_after) lr *= cfg_.decay_factor;
  return lr;
}

void Adam::step(ParamStore& store) {
  const double lr = current_lr();
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto& tensors = store.tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto& t = tensors[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double g = t.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      t.value[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
    }
  }
}

GradCheckResult grad_check(ParamStore& store, const std::function<double()>& loss, double eps,
                           std::size_t samples, std::uint64_t seed, double floor) {
  if (!(eps >= 1e-7 && eps <= 1e-3))
    throw Error(ErrorCode::InvalidArgument, "grad_check eps must lie in [1e-7, 1e-3]");
  const std::size_t total = store.total_size();
  Rng rng(seed, {0x67636bULL});
  GradCheckResult out;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t idx = static_cast<std::size_t>(rng.below(total));
    const double analytic = store.grad(idx);
    double& p = store.value(idx);
    const double saved = p;
    p = saved + eps;
    const double lp = loss();
    p = saved - eps;
    const double lm = loss();
    p = saved;
    const double numeric = (lp - lm) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
    out.indices.push_back(idx);
    out.analytic.push_back(analytic);
    out.numeric.push_back(numeric);
    ++out.checked;
  }
  return out;
}

double mse(const Matrix& pred, const Matrix& target, double weight, Matrix* dpred) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw Error(ErrorCode::ShapeMismatch, "mse shape mismatch");
  const auto p = pred.data();
  const auto t = target.data();
  const double n = static_cast<double>(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    sum += d * d;
  }
  if (dpred) {
    *dpred = Matrix(pred.rows(), pred.cols());
    auto g = dpred->data();
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = 2.0 * weight * (p[i] - t[i]) / n;
  }
  return weight * sum / n;
}

}  // namespace auxguide::nn
