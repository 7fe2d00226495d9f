#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fpnn/common/error.hpp"

namespace fpnn::nn {

/// Rank 1..3 dense array with a same-shaped gradient buffer. The shape is
/// fixed at construction.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 3) throw ContractError("tensor rank must be 1..3");
    std::size_t n = 1;
    for (auto d : shape_) n *= d;
    values_.assign(n, Real{0});
    grad_.assign(n, Real{0});
  }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const noexcept { return shape_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> values() const noexcept { return values_; }
  std::span<Real> grad() noexcept { return grad_; }
  std::span<const Real> grad() const noexcept { return grad_; }

  Real* data() noexcept { return values_.data(); }
  const Real* data() const noexcept { return values_.data(); }

  Real& operator[](std::size_t i) noexcept { return values_[i]; }
  Real operator[](std::size_t i) const noexcept { return values_[i]; }
  Real& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * shape_[1] + j]; }
  Real operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * shape_[1] + j]; }
  Real& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }
  Real operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void zero_grad() noexcept { std::fill(grad_.begin(), grad_.end(), Real{0}); }

  bool all_finite() const noexcept {
    const auto finite = [](Real v) { return std::isfinite(v); };
    return std::all_of(values_.begin(), values_.end(), finite) && std::all_of(grad_.begin(), grad_.end(), finite);
  }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "x" : "") + std::to_string(shape_[i]);
    return s + ")";
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<Real> values_;
  std::vector<Real> grad_;
};

/// How the optimizer and checkpoints treat a named tensor.
enum class ParamKind {
  weight,  // trainable, weight-decayed
  exempt,  // trainable, no decay (biases, batch-norm affine, probing locations)
  buffer,  // not trainable, checkpointed (running statistics)
};

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real>* tensor = nullptr;
  ParamKind kind = ParamKind::weight;
  bool frozen = false;

  bool trainable() const noexcept { return kind != ParamKind::buffer && !frozen; }
};

}  // namespace fpnn::nn
