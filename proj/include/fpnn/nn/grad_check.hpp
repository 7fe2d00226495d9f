#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fpnn/common/rng.hpp"
#include "fpnn/nn/layers.hpp"

namespace fpnn::nn {

/// One parameter block under test: live values the harness perturbs in
/// place, and the analytic gradient to compare against.
struct GradBlock {
  std::string name;
  std::span<double> values;
  std::vector<double> analytic;
};

struct BlockReport {
  std::string name;
  std::size_t count = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockReport> blocks;

  double max_rel_error() const noexcept;
  bool passed(double tolerance) const noexcept { return max_rel_error() <= tolerance; }
  std::string summary() const;
};

/// Fourth-order central finite differences (steps +-h, +-2h) of `loss`
/// against each block's analytic gradient, in double precision. The step for a block is
/// rel_step * max(rms(block), 1e-3). Per-entry error is
/// |a - n| / max(|a|, |n|, 1e-3 * max|a| over the block, 1e-12).
GradCheckReport grad_check(const std::function<double()>& loss, std::vector<GradBlock>& blocks,
                           double rel_step = 1e-4);

/// Checks one layer against L = sum(r * layer(x)) for a fixed random r:
/// the input gradient plus every trainable parameter. Dropout layers keep
/// their current seed, so the mask is fixed across evaluations.
GradCheckReport check_layer(Layer<double>& layer, const Tensor<double>& input, Mode mode, Rng& rng,
                            double rel_step = 1e-4);

}  // namespace fpnn::nn
