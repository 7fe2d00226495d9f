#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpnn/field/sampler.hpp"
#include "fpnn/probing/filter_bank.hpp"

namespace fpnn::probing {

/// Sensor output for one sample: the C x N x T chunk of sampled values and
/// the C x N x T x 3 spatial gradients cached for the backward pass.
template <typename Real>
struct SensorOutput {
  std::size_t filters = 0, points = 0, channels = 0;
  std::vector<Real> values;
  std::vector<Real> gradients;

  bool valid() const noexcept { return !values.empty(); }
};

/// Samples the field at every probing location. Throws ContractError if
/// the field's channel count or resolution differs from the bank's.
template <typename Real>
SensorOutput<Real> sensor_forward(const FilterBank<Real>& bank, const field::FieldSampler<Real>& sampler);

/// location_grad[c,n,:] += sum_t upstream[c,n,t] * gradient[c,n,t,:]
template <typename Real>
void sensor_backward(FilterBank<Real>& bank, const SensorOutput<Real>& cache, std::span<const Real> upstream);

/// Throws ConfigError unless sigma > 0 and finite.
void check_sigma(double sigma);

/// g(x) = exp(-x^2 / (2 sigma^2)), element-wise.
template <typename Real>
void gaussian_forward(std::span<const Real> x, Real sigma, std::span<Real> out);

/// dx = upstream * (-x / sigma^2) * g(x)
template <typename Real>
void gaussian_backward(std::span<const Real> x, std::span<const Real> upstream, Real sigma, std::span<Real> dx);

/// v_c = sum_{n,t} p[c,n,t] * w[c,n,t]; no mixing across filters.
template <typename Real>
std::vector<Real> dotproduct_forward(const FilterBank<Real>& bank, std::span<const Real> input);

/// Returns dL/dp = upstream_c * w and accumulates weight_grad += upstream_c * p.
template <typename Real>
std::vector<Real> dotproduct_backward(FilterBank<Real>& bank, std::span<const Real> input,
                                      std::span<const Real> upstream);

template <typename Real>
struct ProbingCache {
  SensorOutput<Real> sensor;
  std::vector<Real> transformed;  // after the Gaussian on distance channels
};

/// Sensor -> Gaussian (distance-role channels only) -> DotProduct.
template <typename Real>
class ProbingLayer {
 public:
  ProbingLayer() = default;
  ProbingLayer(Real sigma, std::vector<field::ChannelRole> roles);

  Real sigma() const noexcept { return sigma_; }
  const std::vector<field::ChannelRole>& roles() const noexcept { return roles_; }

  std::vector<Real> forward(const FilterBank<Real>& bank, const field::FieldSampler<Real>& sampler,
                            ProbingCache<Real>& cache) const;

  /// Routes upstream (C) back through all three stages, accumulating
  /// weight and location gradients into `bank`.
  void backward(FilterBank<Real>& bank, const ProbingCache<Real>& cache, std::span<const Real> upstream) const;

 private:
  Real sigma_ = 1;
  std::vector<field::ChannelRole> roles_;
};

/// Multiply-accumulates per sample in the DotProduct stage: C * N * T.
std::uint64_t mac_count(std::uint64_t filters, std::uint64_t points, std::uint64_t channels) noexcept;

template <typename Real>
std::uint64_t mac_count(const FilterBank<Real>& bank) noexcept {
  return mac_count(bank.filters(), bank.points(), bank.channels());
}

}  // namespace fpnn::probing
