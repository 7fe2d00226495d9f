#include "fpnn/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "fpnn/common/error.hpp"

namespace fpnn::simd {

#if defined(FPNN_HAVE_AVX2)
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void sgd_update(float* w, const float* g, float* v, std::size_t n, float lr, float momentum, float decay);
void trilerp_packed(const float* base, std::size_t stride, std::size_t row, std::size_t slice,
                    const scalar::CornerWeights<float>& w, float* out);
}  // namespace avx2
#endif

namespace {

float scalar_dot(const float* a, const float* b, std::size_t n) { return scalar::dot(a, b, n); }
void scalar_axpy(float alpha, const float* x, float* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void scalar_sgd(float* w, const float* g, float* v, std::size_t n, float lr, float m, float d) {
  scalar::sgd_update(w, g, v, n, lr, m, d);
}
void scalar_trilerp(const float* base, std::size_t stride, std::size_t row, std::size_t slice,
                    const scalar::CornerWeights<float>& w, float* out) {
  scalar::trilerp_packed(base, stride, row, slice, w, out);
}

constexpr KernelTable kScalarTable{Isa::scalar, scalar_dot, scalar_axpy, scalar_sgd, scalar_trilerp};

#if defined(FPNN_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::avx2, avx2::dot, avx2::axpy, avx2::sgd_update, avx2::trilerp_packed};
#endif

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("FPNN_SIMD")) {
    if (auto isa = parse_isa(env); isa && isa_available(*isa)) return &table_for(*isa);
  }
  if (isa_available(Isa::avx2)) return &table_for(Isa::avx2);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

std::optional<Isa> parse_isa(std::string_view name) noexcept {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  return std::nullopt;
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(FPNN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_available(isa)) throw ContractError("instruction set not available: " + std::string(to_string(isa)));
#if defined(FPNN_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

Isa active_isa() noexcept { return active().isa; }

void set_active_isa(Isa isa) { current().store(&table_for(isa), std::memory_order_relaxed); }

}  // namespace fpnn::simd
