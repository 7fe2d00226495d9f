#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpnn/field/sampler.hpp"
#include "fpnn/nn/net_spec.hpp"
#include "fpnn/probing/layers.hpp"
#include "fpnn/trainer/config.hpp"

namespace fpnn::trainer {

std::vector<field::ChannelRole> channel_roles(bool normals);

/// A field probing network: filter bank + probing layer feeding a dense
/// head. Per-sample probing runs separately from the batched head so the
/// caller can parallelize it.
template <typename Real>
class Model {
 public:
  Model(nn::NetSpec spec, const probing::InitConfig& init, int resolution, Real sigma,
        std::vector<field::ChannelRole> roles, std::uint64_t head_seed);

  /// The network a config describes, for `classes` outputs.
  static Model from_config(const TrainConfig& cfg, std::size_t classes);

  const nn::NetSpec& spec() const noexcept { return spec_; }
  std::size_t classes() const noexcept { return spec_.classes; }
  probing::FilterBank<Real>& bank() noexcept { return bank_; }
  const probing::FilterBank<Real>& bank() const noexcept { return bank_; }
  const probing::ProbingLayer<Real>& probing() const noexcept { return probing_; }
  nn::Sequential<Real>& head() noexcept { return head_; }

  /// Every checkpointed tensor: "probing.locations" (no decay),
  /// "probing.weights", then "head.<i>.<kind>.<name>".
  std::vector<nn::Parameter<Real>> parameters(bool freeze_probing = false, bool freeze_head = false);

  /// Probing stage for one sample; `cache` is kept for backward.
  std::vector<Real> probe(const field::FieldSampler<Real>& sampler, probing::ProbingCache<Real>& cache) const;

  struct BatchResult {
    double loss = 0.0;
    std::size_t correct = 0;
    nn::Tensor<Real> logits;
  };

  /// Head forward in train mode, loss, and backward through the head and
  /// (unless skip_probing) every sample's probing stage in sample order.
  /// Gradients accumulate; callers zero them between steps.
  BatchResult train_batch(const nn::Tensor<Real>& features, std::span<const probing::ProbingCache<Real>> caches,
                          const std::vector<int>& labels, std::uint64_t dropout_seed, bool skip_probing = false);

  nn::Tensor<Real> logits(const nn::Tensor<Real>& features);
  /// Eval-mode output of head layer `layer` (inclusive).
  nn::Tensor<Real> tap(const nn::Tensor<Real>& features, std::size_t layer);
  /// Head layer whose output feeds the final FC.
  std::size_t default_tap() const noexcept { return head_.size() - 2; }

  void zero_grad();

 private:
  nn::NetSpec spec_;
  probing::FilterBank<Real> bank_;
  probing::ProbingLayer<Real> probing_;
  nn::Sequential<Real> head_;
};

/// Stacks per-sample probing outputs into a batch x C tensor.
template <typename Real>
nn::Tensor<Real> stack_rows(const std::vector<std::vector<Real>>& rows);

}  // namespace fpnn::trainer
