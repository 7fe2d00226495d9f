#pragma once

// Scalar reference kernels. These define the semantics every vectorized
// variant must reproduce, and they are the only path for double precision.

#include <array>
#include <cstddef>

namespace fpnn::simd::scalar {

template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) noexcept {
  Real acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

/// y += alpha * x
template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

/// Momentum SGD with L2 decay folded into the gradient:
///   g' = g + decay*w ; v = momentum*v - lr*g' ; w += v
template <typename Real>
void sgd_update(Real* w, const Real* g, Real* v, std::size_t n, Real lr, Real momentum, Real decay) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    const Real gd = g[i] + decay * w[i];
    v[i] = momentum * v[i] - lr * gd;
    w[i] = w[i] + v[i];
  }
}

/// Corner k of a cell is (dx, dy, dz) = (k & 1, (k >> 1) & 1, k >> 2).
template <typename Real>
using CornerWeights = std::array<Real, 8>;

/// Blends `stride` packed channels of the 8 cell corners. `base` points at
/// corner (0,0,0); `row` and `slice` are the node strides (in elements) along
/// y and z. Accumulation order is corner 0..7, no fused multiply-add.
template <typename Real>
void trilerp_packed(const Real* base, std::size_t stride, std::size_t row, std::size_t slice,
                    const CornerWeights<Real>& w, Real* out) noexcept {
  const std::array<std::size_t, 8> offsets = {0,           stride,           row,           row + stride,
                                              slice,       slice + stride,   slice + row,   slice + row + stride};
  for (std::size_t c = 0; c < stride; ++c) {
    Real acc = w[0] * base[offsets[0] + c];
    for (std::size_t k = 1; k < 8; ++k) acc = acc + w[k] * base[offsets[k] + c];
    out[c] = acc;
  }
}

}  // namespace fpnn::simd::scalar
