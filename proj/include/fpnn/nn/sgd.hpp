#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpnn/nn/tensor.hpp"

namespace fpnn::nn {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::size_t batch_size = 32;
  std::size_t max_iterations = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Momentum SGD. Decay applies only to ParamKind::weight; buffers and
/// frozen parameters are skipped. Gradients are taken as given (the loss
/// is already a batch mean).
template <typename Real>
class Sgd {
 public:
  explicit Sgd(const SgdConfig& cfg);

  void step(const std::vector<Parameter<Real>>& params);

  /// Velocity buffers keyed by parameter name; created lazily on first step.
  std::map<std::string, std::vector<Real>>& velocities() noexcept { return velocities_; }
  const std::map<std::string, std::vector<Real>>& velocities() const noexcept { return velocities_; }

 private:
  SgdConfig cfg_;
  std::map<std::string, std::vector<Real>> velocities_;
};

}  // namespace fpnn::nn
