#pragma once

#include <cstddef>
#include <cstdint>

#include "fpnn/nn/tensor.hpp"

namespace fpnn::probing {

/// C probing filters of N points each over a T-channel field of resolution
/// R. Locations (C x N x 3, voxel units) and weights (C x N x T) are both
/// trainable; their gradient buffers accumulate across a batch.
template <typename Real>
class FilterBank {
 public:
  FilterBank() = default;
  FilterBank(std::size_t filters, std::size_t points, std::size_t channels, int resolution);

  std::size_t filters() const noexcept { return filters_; }
  std::size_t points() const noexcept { return points_; }
  std::size_t channels() const noexcept { return channels_; }
  int resolution() const noexcept { return resolution_; }

  nn::Tensor<Real>& locations() noexcept { return locations_; }
  const nn::Tensor<Real>& locations() const noexcept { return locations_; }
  nn::Tensor<Real>& weights() noexcept { return weights_; }
  const nn::Tensor<Real>& weights() const noexcept { return weights_; }

  const Real* location(std::size_t c, std::size_t n) const noexcept {
    return locations_.data() + (c * points_ + n) * 3;
  }
  Real* location(std::size_t c, std::size_t n) noexcept { return locations_.data() + (c * points_ + n) * 3; }

  void zero_gradients() noexcept {
    locations_.zero_grad();
    weights_.zero_grad();
  }

  /// Projects every location into [0, R-1]^3.
  void clamp_locations() noexcept;

  bool locations_in_domain() const noexcept;

 private:
  std::size_t filters_ = 0;
  std::size_t points_ = 0;
  std::size_t channels_ = 0;
  int resolution_ = 0;
  nn::Tensor<Real> locations_;
  nn::Tensor<Real> weights_;
};

struct InitConfig {
  int grid = 4;                  // G: subdivisions per axis
  int filters_per_cell = 16;     // P
  int points_per_filter = 8;     // N
  double length_low = 0.2;       // fraction of R
  double length_high = 0.8;      // fraction of R
  std::uint64_t seed = 1;

  std::size_t filter_count() const noexcept {
    return static_cast<std::size_t>(grid) * grid * grid * static_cast<std::size_t>(filters_per_cell);
  }

  /// Throws ConfigError unless G, P, N >= 1 and 0 < l_low <= l_high < 1.
  void validate() const;
};

/// Line-segment initialization: for each of the G^3 cells and each of its P
/// filters, a center uniform in the cell, a direction uniform on the sphere
/// and a length uniform in [l_low*R, l_high*R]; N points evenly spaced
/// along the segment, endpoints included. Out-of-domain filters are redrawn
/// up to 100 times, then clamped. Weights are Xavier-uniform with
/// fan_in = N*T, fan_out = 1.
template <typename Real>
FilterBank<Real> init_filter_bank(const InitConfig& cfg, int resolution, std::size_t channels);

}  // namespace fpnn::probing
