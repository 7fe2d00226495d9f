#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fpnn::bench {

/// Dense 3D convolution of a single-channel R^3 input with C_out cubic K^3
/// kernels at S^3 sliding positions.
struct ConvConfig {
  int kernel = 6;     // K
  int outputs = 48;   // C_out
  int positions = 12; // S
  int stride = 2;

  /// Throws ConfigError unless (S-1)*stride + K <= R and all sizes >= 1.
  void validate(int resolution) const;
};

enum class ConvScaling { fixed_stride, fixed_positions };

/// Fixed-stride keeps the stride and lets S = (R-K)/stride + 1 grow with R;
/// fixed-positions keeps S and derives the largest stride that fits.
ConvConfig conv_for_resolution(const ConvConfig& base, int resolution, ConvScaling scaling);

/// Direct loops, forward only. Input is x-fastest R^3; weights are
/// C_out x K^3 (kz, ky, kx); output is C_out x S^3.
std::vector<float> conv3d_reference(const std::vector<float>& input, int resolution, const ConvConfig& cfg,
                                    const std::vector<float>& weights);

std::uint64_t conv_mac_count(const ConvConfig& cfg) noexcept;

struct Timing {
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t reps = 0;
};

/// Monotonic-clock timing: `warmups` unmeasured calls, then at least
/// `min_reps` measured calls, raised until the measured total reaches
/// `min_total_ms`.
Timing time_it(const std::function<void()>& fn, int warmups = 3, std::size_t min_reps = 10,
               double min_total_ms = 50.0);

struct BenchRow {
  int resolution = 0;
  std::string kind;  // "probing" or "conv"
  Timing timing;
  std::uint64_t macs = 0;
  std::uint64_t bytes = 0;
};

struct BenchOptions {
  std::vector<int> resolutions = {16, 32, 64};
  // probing: full-scale defaults C=1024 (G=4, P=16), N=8, T=4
  int grid = 4;
  int filters_per_cell = 16;
  int points = 8;
  bool normals = true;
  ConvConfig conv{};
  ConvScaling scaling = ConvScaling::fixed_stride;
  bool run_conv = true;
  std::size_t workers = 1;  // > 1 enables parallel probing over a batch
  std::size_t batch = 1;
  int warmups = 3;
  std::size_t min_reps = 10;
  double min_total_ms = 50.0;
  std::uint64_t seed = 1;
};

/// Probing forward+backward and conv forward at each resolution.
std::vector<BenchRow> run_bench(const BenchOptions& options);

/// "# machine: ..." comment lines, then
/// "resolution,kind,mean_ms,std_ms,macs,bytes".
std::string format_bench_csv(const std::vector<BenchRow>& rows, const BenchOptions& options);

std::string machine_info();

}  // namespace fpnn::bench
