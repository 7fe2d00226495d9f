#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fpnn/field/field.hpp"

namespace fpnn::field {

template <typename Real>
struct FieldSampleResult {
  std::vector<Real> value;                    // T
  std::vector<std::array<Real, 3>> gradient;  // T x (d/dx, d/dy, d/dz), per voxel
};

/// Read-only sampling view of a field: trilinear values plus trilinearly
/// interpolated central-difference gradients.
///
/// Construction precomputes the gradient field of every channel and packs
/// each node as [values(T), gradients(3T)] padded to a multiple of 8, so a
/// single sample touches 8 contiguous node records. Locations are clamped
/// component-wise to [0, R-1]; a clamped component reports zero gradient.
template <typename Real>
class FieldSampler {
 public:
  explicit FieldSampler(const BasicField3D<Real>& field);

  int resolution() const noexcept { return resolution_; }
  std::size_t channels() const noexcept { return roles_.size(); }
  const std::vector<ChannelRole>& roles() const noexcept { return roles_; }

  /// Packed record width; scratch buffers passed to sample_packed need this many elements.
  std::size_t stride() const noexcept { return stride_; }

  FieldSampleResult<Real> sample(const std::array<Real, 3>& location) const;

  /// Hot path. Writes T values then 3T gradient entries (channel-major,
  /// axis fastest) into `out[0 .. stride())`.
  void sample_packed(const Real* location, Real* out) const;

  std::size_t bytes() const noexcept { return packed_.size() * sizeof(Real); }

 private:
  int resolution_;
  std::size_t stride_;
  std::vector<ChannelRole> roles_;
  std::vector<Real> packed_;
};

template <typename Real>
FieldSampleResult<Real> sample(const FieldSampler<Real>& sampler, const std::array<Real, 3>& location) {
  return sampler.sample(location);
}

}  // namespace fpnn::field
