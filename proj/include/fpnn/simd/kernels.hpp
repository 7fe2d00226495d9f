#pragma once

// Runtime-dispatched single-precision kernels for the data-parallel inner
// loops (dot products, axpy updates, SGD, packed trilinear blends).
//
// The active instruction set is chosen once on first use: AVX2+FMA when the
// CPU reports it and the build includes the AVX2 translation unit, scalar
// otherwise. FPNN_SIMD=scalar|avx2 in the environment overrides detection.

#include <cstddef>
#include <optional>
#include <string_view>

#include "fpnn/simd/scalar.hpp"

namespace fpnn::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

struct KernelTable {
  Isa isa;
  float (*dot)(const float* a, const float* b, std::size_t n);
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  void (*sgd_update)(float* w, const float* g, float* v, std::size_t n, float lr, float momentum, float decay);
  // Requires stride % 8 == 0 for the AVX2 variant; callers pad.
  void (*trilerp_packed)(const float* base, std::size_t stride, std::size_t row, std::size_t slice,
                         const scalar::CornerWeights<float>& w, float* out);
};

/// True if `isa` was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Kernel table for a specific ISA. Throws ContractError if unavailable.
const KernelTable& table_for(Isa isa);

const KernelTable& active() noexcept;
Isa active_isa() noexcept;

/// Switches the process-wide table. Not synchronized with concurrent kernel
/// calls; intended for startup and tests.
void set_active_isa(Isa isa);

/// Packed channel stride used by sampling grids holding `channels` values per node.
constexpr std::size_t padded_stride(std::size_t channels) noexcept { return (channels + 7) / 8 * 8; }

// Precision-generic entry points. float goes through the active table,
// double through the scalar reference.

inline float dot(const float* a, const float* b, std::size_t n) { return active().dot(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }

inline void axpy(float alpha, const float* x, float* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }

inline void sgd_update(float* w, const float* g, float* v, std::size_t n, float lr, float momentum, float decay) {
  active().sgd_update(w, g, v, n, lr, momentum, decay);
}
inline void sgd_update(double* w, const double* g, double* v, std::size_t n, double lr, double momentum,
                       double decay) {
  scalar::sgd_update(w, g, v, n, lr, momentum, decay);
}

inline void trilerp_packed(const float* base, std::size_t stride, std::size_t row, std::size_t slice,
                           const scalar::CornerWeights<float>& w, float* out) {
  active().trilerp_packed(base, stride, row, slice, w, out);
}
inline void trilerp_packed(const double* base, std::size_t stride, std::size_t row, std::size_t slice,
                           const scalar::CornerWeights<double>& w, double* out) {
  scalar::trilerp_packed(base, stride, row, slice, w, out);
}

}  // namespace fpnn::simd
