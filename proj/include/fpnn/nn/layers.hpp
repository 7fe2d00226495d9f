#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fpnn/common/rng.hpp"
#include "fpnn/nn/tensor.hpp"

namespace fpnn::nn {

enum class Mode { train, eval };

/// Dense layer over batch x features activations. forward() caches what
/// backward() needs; backward() returns dL/dx and accumulates parameter
/// gradients.
template <typename Real>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor<Real> forward(const Tensor<Real>& x, Mode mode) = 0;
  virtual Tensor<Real> backward(const Tensor<Real>& dy) = 0;
  /// Names are local ("weight", "gamma", ...); containers prefix them.
  virtual std::vector<Parameter<Real>> parameters() { return {}; }
  /// Per-iteration randomness (dropout masks).
  virtual void reseed(std::uint64_t) {}
};

/// y = x W^T + b, W is out x in. Xavier-uniform init, zero bias.
template <typename Real>
class FullyConnected final : public Layer<Real> {
 public:
  FullyConnected(std::size_t in, std::size_t out, Rng& rng);

  std::string kind() const override { return "fc"; }
  Tensor<Real> forward(const Tensor<Real>& x, Mode mode) override;
  Tensor<Real> backward(const Tensor<Real>& dy) override;
  std::vector<Parameter<Real>> parameters() override;

  Tensor<Real>& weight() noexcept { return weight_; }
  Tensor<Real>& bias() noexcept { return bias_; }
  std::size_t in_features() const noexcept { return weight_.dim(1); }
  std::size_t out_features() const noexcept { return weight_.dim(0); }

 private:
  Tensor<Real> weight_;
  Tensor<Real> bias_;
  Tensor<Real> input_;
};

/// Per-feature batch normalization. Train mode uses batch statistics
/// (biased variance) and updates running averages with
/// running = momentum * running + (1 - momentum) * batch (unbiased variance);
/// eval mode uses the running averages.
template <typename Real>
class BatchNorm final : public Layer<Real> {
 public:
  explicit BatchNorm(std::size_t features, double momentum = 0.9, double epsilon = 1e-5);

  std::string kind() const override { return "bn"; }
  Tensor<Real> forward(const Tensor<Real>& x, Mode mode) override;
  Tensor<Real> backward(const Tensor<Real>& dy) override;
  std::vector<Parameter<Real>> parameters() override;

  Tensor<Real>& gamma() noexcept { return gamma_; }
  Tensor<Real>& beta() noexcept { return beta_; }
  Tensor<Real>& running_mean() noexcept { return running_mean_; }
  Tensor<Real>& running_var() noexcept { return running_var_; }

 private:
  Real momentum_;
  Real epsilon_;
  Tensor<Real> gamma_, beta_, running_mean_, running_var_;
  Mode mode_ = Mode::train;
  Tensor<Real> xhat_;
  std::vector<Real> inv_std_;
};

template <typename Real>
class Relu final : public Layer<Real> {
 public:
  std::string kind() const override { return "relu"; }
  Tensor<Real> forward(const Tensor<Real>& x, Mode mode) override;
  Tensor<Real> backward(const Tensor<Real>& dy) override;

 private:
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> shape_;
};

/// Inverted dropout: survivors are scaled by 1/(1-rate) in train mode; eval
/// mode is the identity. The mask is a pure function of the current seed.
template <typename Real>
class Dropout final : public Layer<Real> {
 public:
  explicit Dropout(double rate, std::uint64_t seed = 0);

  std::string kind() const override { return "dropout"; }
  Tensor<Real> forward(const Tensor<Real>& x, Mode mode) override;
  Tensor<Real> backward(const Tensor<Real>& dy) override;
  void reseed(std::uint64_t seed) override { seed_ = seed; }

  double rate() const noexcept { return rate_; }

 private:
  double rate_;
  std::uint64_t seed_;
  std::vector<Real> scale_;  // 0 or 1/(1-rate) per element; empty in eval mode
};

/// Ordered stack of layers. Parameter names are "<index>.<kind>.<local>".
template <typename Real>
class Sequential {
 public:
  void add(std::unique_ptr<Layer<Real>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<Real> forward(const Tensor<Real>& x, Mode mode);
  /// Output of layer `tap` (inclusive) rather than the whole stack.
  Tensor<Real> forward_until(const Tensor<Real>& x, Mode mode, std::size_t tap);
  Tensor<Real> backward(const Tensor<Real>& dy);
  std::vector<Parameter<Real>> parameters(const std::string& prefix = "");
  void reseed(std::uint64_t seed);

  std::size_t size() const noexcept { return layers_.size(); }
  Layer<Real>& at(std::size_t i) { return *layers_.at(i); }

 private:
  std::vector<std::unique_ptr<Layer<Real>>> layers_;
};

template <typename Real>
struct LossResult {
  double loss = 0.0;      // mean over the batch
  Tensor<Real> grad;      // (softmax - one_hot) / batch
  std::size_t correct = 0;
};

/// Row-max-shifted softmax cross-entropy. Throws ContractError on a label
/// outside [0, K).
template <typename Real>
LossResult<Real> softmax_cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels);

template <typename Real>
std::size_t argmax(std::span<const Real> row) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace fpnn::nn
