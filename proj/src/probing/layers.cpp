#include "fpnn/probing/layers.hpp"

#include <cmath>
#include <string>

#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"
#include "fpnn/simd/kernels.hpp"

namespace fpnn::probing {

template <typename Real>
SensorOutput<Real> sensor_forward(const FilterBank<Real>& bank, const field::FieldSampler<Real>& sampler) {
  if (sampler.channels() != bank.channels()) {
    throw ContractError("sensor: field has " + std::to_string(sampler.channels()) + " channels, bank expects " +
                        std::to_string(bank.channels()));
  }
  if (sampler.resolution() != bank.resolution()) {
    throw ContractError("sensor: field resolution " + std::to_string(sampler.resolution()) + " != bank resolution " +
                        std::to_string(bank.resolution()));
  }
  const std::size_t t_count = bank.channels();
  const std::size_t points = bank.filters() * bank.points();
  SensorOutput<Real> out;
  out.filters = bank.filters();
  out.points = bank.points();
  out.channels = t_count;
  out.values.resize(points * t_count);
  out.gradients.resize(points * t_count * 3);

  std::vector<Real> scratch(sampler.stride());
  const Real* loc = bank.locations().data();
  for (std::size_t p = 0; p < points; ++p) {
    sampler.sample_packed(loc + 3 * p, scratch.data());
    std::copy_n(scratch.data(), t_count, out.values.data() + p * t_count);
    std::copy_n(scratch.data() + t_count, 3 * t_count, out.gradients.data() + p * t_count * 3);
  }
  return out;
}

template <typename Real>
void sensor_backward(FilterBank<Real>& bank, const SensorOutput<Real>& cache, std::span<const Real> upstream) {
  if (!cache.valid()) throw ContractError("sensor backward called without a forward pass");
  if (cache.filters != bank.filters() || cache.points != bank.points() || cache.channels != bank.channels()) {
    throw ContractError("sensor backward: cache does not match the bank");
  }
  if (upstream.size() != cache.values.size()) throw ContractError("sensor backward: upstream size mismatch");
  const std::size_t t_count = cache.channels;
  const std::size_t points = cache.filters * cache.points;
  auto grad = bank.locations().grad();
  for (std::size_t p = 0; p < points; ++p) {
    Real gx = 0, gy = 0, gz = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const Real u = upstream[p * t_count + t];
      const Real* g = cache.gradients.data() + (p * t_count + t) * 3;
      gx += u * g[0];
      gy += u * g[1];
      gz += u * g[2];
    }
    grad[3 * p] += gx;
    grad[3 * p + 1] += gy;
    grad[3 * p + 2] += gz;
  }
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian sigma must be > 0, got " + format_double(sigma));
}

template <typename Real>
void gaussian_forward(std::span<const Real> x, Real sigma, std::span<Real> out) {
  if (out.size() != x.size()) throw ContractError("gaussian: output size mismatch");
  const Real inv = Real{1} / (2 * sigma * sigma);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(-x[i] * x[i] * inv);
}

template <typename Real>
void gaussian_backward(std::span<const Real> x, std::span<const Real> upstream, Real sigma, std::span<Real> dx) {
  if (upstream.size() != x.size() || dx.size() != x.size()) throw ContractError("gaussian backward: size mismatch");
  const Real s2 = sigma * sigma;
  const Real inv = Real{1} / (2 * s2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real g = std::exp(-x[i] * x[i] * inv);
    dx[i] = upstream[i] * (-x[i] / s2) * g;
  }
}

template <typename Real>
std::vector<Real> dotproduct_forward(const FilterBank<Real>& bank, std::span<const Real> input) {
  const std::size_t span = bank.points() * bank.channels();
  if (input.size() != bank.filters() * span) throw ContractError("dotproduct: input shape does not match bank");
  std::vector<Real> v(bank.filters());
  const Real* w = bank.weights().data();
  for (std::size_t c = 0; c < bank.filters(); ++c) v[c] = simd::dot(input.data() + c * span, w + c * span, span);
  return v;
}

template <typename Real>
std::vector<Real> dotproduct_backward(FilterBank<Real>& bank, std::span<const Real> input,
                                      std::span<const Real> upstream) {
  const std::size_t span = bank.points() * bank.channels();
  if (input.size() != bank.filters() * span || upstream.size() != bank.filters()) {
    throw ContractError("dotproduct backward: shape mismatch");
  }
  std::vector<Real> dinput(input.size(), Real{0});
  const Real* w = bank.weights().data();
  Real* wg = bank.weights().grad().data();
  for (std::size_t c = 0; c < bank.filters(); ++c) {
    const Real u = upstream[c];
    if (u == 0) continue;
    simd::axpy(u, w + c * span, dinput.data() + c * span, span);
    simd::axpy(u, input.data() + c * span, wg + c * span, span);
  }
  return dinput;
}

template <typename Real>
ProbingLayer<Real>::ProbingLayer(Real sigma, std::vector<field::ChannelRole> roles)
    : sigma_(sigma), roles_(std::move(roles)) {
  check_sigma(static_cast<double>(sigma));
}

template <typename Real>
std::vector<Real> ProbingLayer<Real>::forward(const FilterBank<Real>& bank, const field::FieldSampler<Real>& sampler,
                                              ProbingCache<Real>& cache) const {
  if (sampler.roles() != roles_) throw ContractError("probing layer: field channel roles differ from configuration");
  cache.sensor = sensor_forward(bank, sampler);
  cache.transformed = cache.sensor.values;
  const std::size_t t_count = roles_.size();
  const Real inv = Real{1} / (2 * sigma_ * sigma_);
  for (std::size_t t = 0; t < t_count; ++t) {
    if (roles_[t] != field::ChannelRole::distance) continue;
    for (std::size_t i = t; i < cache.transformed.size(); i += t_count) {
      const Real x = cache.transformed[i];
      cache.transformed[i] = std::exp(-x * x * inv);
    }
  }
  return dotproduct_forward(bank, std::span<const Real>(cache.transformed));
}

template <typename Real>
void ProbingLayer<Real>::backward(FilterBank<Real>& bank, const ProbingCache<Real>& cache,
                                  std::span<const Real> upstream) const {
  if (!cache.sensor.valid()) throw ContractError("probing backward called without a forward pass");
  auto dp = dotproduct_backward(bank, std::span<const Real>(cache.transformed), upstream);
  const std::size_t t_count = roles_.size();
  const Real s2 = sigma_ * sigma_;
  for (std::size_t t = 0; t < t_count; ++t) {
    if (roles_[t] != field::ChannelRole::distance) continue;
    for (std::size_t i = t; i < dp.size(); i += t_count) {
      const Real x = cache.sensor.values[i];
      dp[i] = dp[i] * (-x / s2) * cache.transformed[i];
    }
  }
  sensor_backward(bank, cache.sensor, std::span<const Real>(dp));
}

std::uint64_t mac_count(std::uint64_t filters, std::uint64_t points, std::uint64_t channels) noexcept {
  return filters * points * channels;
}

#define FPNN_INSTANTIATE(Real)                                                                                   \
  template SensorOutput<Real> sensor_forward(const FilterBank<Real>&, const field::FieldSampler<Real>&);        \
  template void sensor_backward(FilterBank<Real>&, const SensorOutput<Real>&, std::span<const Real>);           \
  template void gaussian_forward(std::span<const Real>, Real, std::span<Real>);                                 \
  template void gaussian_backward(std::span<const Real>, std::span<const Real>, Real, std::span<Real>);         \
  template std::vector<Real> dotproduct_forward(const FilterBank<Real>&, std::span<const Real>);                \
  template std::vector<Real> dotproduct_backward(FilterBank<Real>&, std::span<const Real>, std::span<const Real>); \
  template class ProbingLayer<Real>;

FPNN_INSTANTIATE(float)
FPNN_INSTANTIATE(double)
#undef FPNN_INSTANTIATE

}  // namespace fpnn::probing
