#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "auxguide/matrix.hpp"

namespace auxguide {
class Rng;
}

namespace auxguide::nn {

/// Named parameter tensor with its gradient accumulator.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const noexcept { return value.size(); }
};

/// Owns every trainable tensor of a model; layers refer to tensors by index.
class ParamStore {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor>& tensors() noexcept { return tensors_; }
  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

  std::size_t total_size() const;
  void zero_grad();
  /// Flat scalar access across all tensors, in registration order.
  double& value(std::size_t flat);
  double grad(std::size_t flat) const;
  bool all_finite() const;

 private:
  std::vector<Tensor> tensors_;
};

/// y = x W + b with W stored in x out.
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out);

  std::size_t in() const noexcept { return in_; }
  std::size_t out() const noexcept { return out_; }

  void init(ParamStore& store, Rng& rng, bool relu_gain) const;
  Matrix forward(const ParamStore& store, const Matrix& x) const;
  /// Accumulates dW, db; returns dL/dx when want_dx.
  Matrix backward(ParamStore& store, const Matrix& x, const Matrix& dy, bool want_dx) const;

 private:
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

enum class Activation { Relu, Identity };

struct MlpTape {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
};

/// Stack of Linear layers with an activation between them (none after the last).
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamStore& store, const std::string& prefix, const std::vector<std::size_t>& sizes,
      Activation act);

  void init(ParamStore& store, Rng& rng) const;
  Matrix forward(const ParamStore& store, const Matrix& x, MlpTape* tape = nullptr) const;
  Matrix backward(ParamStore& store, const MlpTape& tape, const Matrix& dout, bool want_dx) const;

  std::size_t in() const { return layers_.front().in(); }
  std::size_t out() const { return layers_.back().out(); }

 private:
  std::vector<Linear> layers_;
  Activation act_ = Activation::Relu;
};

struct AdamConfig {
  double lr = 1.9e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t warmup = 1000;       // linear warmup steps
  std::size_t decay_after = 0;     // 0 = never; else lr *= decay_factor after this many steps
  double decay_factor = 0.1;
};

class Adam {
 public:
  Adam(const ParamStore& store, AdamConfig cfg);
  void step(ParamStore& store);
  double current_lr() const;
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

/// Compares analytic gradients already stored in `store` against central
/// differences of `loss` on `samples` randomly chosen scalars. Relative error
/// is |a - n| / max(|a|, |n|, floor).
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<std::size_t> indices;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

GradCheckResult grad_check(ParamStore& store, const std::function<double()>& loss, double eps,
                           std::size_t samples, std::uint64_t seed, double floor);

struct TrainLog {
  std::vector<std::pair<std::size_t, double>> curve;  // (step, batch loss)
  double initial_loss = 0.0;  // on a fixed evaluation batch
  double final_loss = 0.0;
  std::vector<std::string> warnings;
};

/// Mean squared error over all entries; writes dL/dpred scaled by `weight`.
double mse(const Matrix& pred, const Matrix& target, double weight, Matrix* dpred);

}  // namespace auxguide::nn
