#include "fpnn/field/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "fpnn/common/error.hpp"
#include "fpnn/field/distance.hpp"
#include "fpnn/simd/kernels.hpp"

namespace fpnn::field {

template <typename Real>
FieldSampler<Real>::FieldSampler(const BasicField3D<Real>& field)
    : resolution_(field.resolution()), stride_(simd::padded_stride(4 * field.channels())), roles_(field.roles()) {
  if (resolution_ < 2) throw ContractError("sampling needs resolution >= 2");
  const std::size_t t_count = field.channels();
  const std::size_t nodes = field.node_count();
  packed_.assign(nodes * stride_, Real{0});
  for (std::size_t c = 0; c < t_count; ++c) {
    const auto values = field.channel(c);
    for (std::size_t i = 0; i < nodes; ++i) packed_[i * stride_ + c] = values[i];
    const auto grad = gradient_field(field, c);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const auto g = grad.channel(axis);
      for (std::size_t i = 0; i < nodes; ++i) packed_[i * stride_ + t_count + 3 * c + axis] = g[i];
    }
  }
}

template <typename Real>
void FieldSampler<Real>::sample_packed(const Real* location, Real* out) const {
  const Real hi = static_cast<Real>(resolution_ - 1);
  std::array<int, 3> base{};
  std::array<Real, 3> frac{};
  std::array<bool, 3> clamped{};
  for (int a = 0; a < 3; ++a) {
    Real p = location[a];
    clamped[a] = !(p >= 0 && p <= hi);
    p = std::clamp(p, Real{0}, hi);
    int i0 = static_cast<int>(std::floor(p));
    i0 = std::min(i0, resolution_ - 2);
    base[a] = i0;
    frac[a] = p - static_cast<Real>(i0);
  }
  const Real wx[2] = {1 - frac[0], frac[0]};
  const Real wy[2] = {1 - frac[1], frac[1]};
  const Real wz[2] = {1 - frac[2], frac[2]};
  simd::scalar::CornerWeights<Real> w;
  for (int k = 0; k < 8; ++k) w[k] = wx[k & 1] * wy[(k >> 1) & 1] * wz[k >> 2];

  const std::size_t row = static_cast<std::size_t>(resolution_) * stride_;
  const std::size_t slice = row * resolution_;
  const Real* corner = packed_.data() + static_cast<std::size_t>(base[2]) * slice +
                       static_cast<std::size_t>(base[1]) * row + static_cast<std::size_t>(base[0]) * stride_;
  simd::trilerp_packed(corner, stride_, row, slice, w, out);

  if (clamped[0] || clamped[1] || clamped[2]) {
    const std::size_t t_count = roles_.size();
    for (std::size_t c = 0; c < t_count; ++c) {
      for (int a = 0; a < 3; ++a) {
        if (clamped[a]) out[t_count + 3 * c + a] = 0;
      }
    }
  }
}

template <typename Real>
FieldSampleResult<Real> FieldSampler<Real>::sample(const std::array<Real, 3>& location) const {
  std::vector<Real> scratch(stride_);
  sample_packed(location.data(), scratch.data());
  const std::size_t t_count = roles_.size();
  FieldSampleResult<Real> r;
  r.value.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(t_count));
  r.gradient.resize(t_count);
  for (std::size_t c = 0; c < t_count; ++c) {
    for (int a = 0; a < 3; ++a) r.gradient[c][a] = scratch[t_count + 3 * c + a];
  }
  return r;
}

template class FieldSampler<float>;
template class FieldSampler<double>;

}  // namespace fpnn::field
