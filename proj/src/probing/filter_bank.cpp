#include "fpnn/probing/filter_bank.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fpnn/common/rng.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::probing {

template <typename Real>
FilterBank<Real>::FilterBank(std::size_t filters, std::size_t points, std::size_t channels, int resolution)
    : filters_(filters),
      points_(points),
      channels_(channels),
      resolution_(resolution),
      locations_({filters, points, 3}),
      weights_({filters, points, channels}) {
  if (filters == 0 || points == 0 || channels == 0) throw ContractError("filter bank dimensions must be positive");
  if (resolution < 2) throw ContractError("filter bank resolution must be >= 2");
}

template <typename Real>
void FilterBank<Real>::clamp_locations() noexcept {
  const Real hi = static_cast<Real>(resolution_ - 1);
  for (Real& v : locations_.values()) v = std::clamp(v, Real{0}, hi);
}

template <typename Real>
bool FilterBank<Real>::locations_in_domain() const noexcept {
  const Real hi = static_cast<Real>(resolution_ - 1);
  return std::all_of(locations_.values().begin(), locations_.values().end(),
                     [hi](Real v) { return v >= 0 && v <= hi; });
}

void InitConfig::validate() const {
  if (grid < 1 || filters_per_cell < 1 || points_per_filter < 1) {
    throw ConfigError("filter init: grid, filters_per_cell and points_per_filter must be >= 1");
  }
  if (!(length_low > 0.0 && length_low <= length_high && length_high < 1.0)) {
    throw ConfigError("filter init: need 0 < length_low <= length_high < 1, got [" + format_double(length_low) +
                      ", " + format_double(length_high) + "]");
  }
}

template <typename Real>
FilterBank<Real> init_filter_bank(const InitConfig& cfg, int resolution, std::size_t channels) {
  cfg.validate();
  const auto n_points = static_cast<std::size_t>(cfg.points_per_filter);
  FilterBank<Real> bank(cfg.filter_count(), n_points, channels, resolution);
  Rng rng(cfg.seed);

  const double hi = resolution - 1;
  const double cell = hi / cfg.grid;
  const double xavier = std::sqrt(6.0 / (static_cast<double>(n_points * channels) + 1.0));
  std::vector<std::array<double, 3>> pts(n_points);

  std::size_t c = 0;
  for (int gz = 0; gz < cfg.grid; ++gz) {
    for (int gy = 0; gy < cfg.grid; ++gy) {
      for (int gx = 0; gx < cfg.grid; ++gx) {
        for (int p = 0; p < cfg.filters_per_cell; ++p, ++c) {
          for (int attempt = 0; attempt < 100; ++attempt) {
            const std::array<double, 3> center = {(gx + uniform(rng, 0.0, 1.0)) * cell,
                                                  (gy + uniform(rng, 0.0, 1.0)) * cell,
                                                  (gz + uniform(rng, 0.0, 1.0)) * cell};
            const double z = uniform(rng, -1.0, 1.0);
            const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
            const std::array<double, 3> dir = {rxy * std::cos(phi), rxy * std::sin(phi), z};
            const double length = uniform(rng, cfg.length_low, cfg.length_high) * resolution;

            bool inside = true;
            for (std::size_t n = 0; n < n_points; ++n) {
              const double t = n_points == 1 ? 0.0 : static_cast<double>(n) / static_cast<double>(n_points - 1) - 0.5;
              for (int a = 0; a < 3; ++a) {
                pts[n][a] = center[a] + t * length * dir[a];
                inside = inside && pts[n][a] >= 0.0 && pts[n][a] <= hi;
              }
            }
            if (inside) break;
          }
          for (std::size_t n = 0; n < n_points; ++n) {
            Real* loc = bank.location(c, n);
            for (int a = 0; a < 3; ++a) loc[a] = static_cast<Real>(std::clamp(pts[n][a], 0.0, hi));
          }
          Real* w = bank.weights().data() + c * n_points * channels;
          for (std::size_t i = 0; i < n_points * channels; ++i) w[i] = static_cast<Real>(uniform(rng, -xavier, xavier));
        }
      }
    }
  }
  return bank;
}

template class FilterBank<float>;
template class FilterBank<double>;
template FilterBank<float> init_filter_bank(const InitConfig&, int, std::size_t);
template FilterBank<double> init_filter_bank(const InitConfig&, int, std::size_t);

}  // namespace fpnn::probing
