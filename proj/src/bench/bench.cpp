#include "fpnn/bench/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "fpnn/common/error.hpp"
#include "fpnn/common/parallel.hpp"
#include "fpnn/common/rng.hpp"
#include "fpnn/field/distance.hpp"
#include "fpnn/field/sampler.hpp"
#include "fpnn/ingest/voxelize.hpp"
#include "fpnn/probing/layers.hpp"
#include "fpnn/simd/kernels.hpp"
#include "fpnn/trainer/model.hpp"
#include "fpnn/trainer/synthetic.hpp"

namespace fpnn::bench {

void ConvConfig::validate(int resolution) const {
  if (kernel < 1 || outputs < 1 || positions < 1 || stride < 1) throw ConfigError("conv sizes must be >= 1");
  if ((positions - 1) * stride + kernel > resolution) {
    throw ConfigError("conv window (S-1)*stride+K = " + std::to_string((positions - 1) * stride + kernel) +
                      " exceeds resolution " + std::to_string(resolution));
  }
}

ConvConfig conv_for_resolution(const ConvConfig& base, int resolution, ConvScaling scaling) {
  ConvConfig c = base;
  if (resolution < c.kernel) throw ConfigError("resolution smaller than the conv kernel");
  if (scaling == ConvScaling::fixed_stride) {
    c.positions = (resolution - c.kernel) / c.stride + 1;
  } else {
    c.stride = c.positions > 1 ? std::max(1, (resolution - c.kernel) / (c.positions - 1)) : 1;
  }
  c.validate(resolution);
  return c;
}

std::vector<float> conv3d_reference(const std::vector<float>& input, int resolution, const ConvConfig& cfg,
                                    const std::vector<float>& weights) {
  cfg.validate(resolution);
  const std::size_t r = static_cast<std::size_t>(resolution);
  const std::size_t k = static_cast<std::size_t>(cfg.kernel), s = static_cast<std::size_t>(cfg.positions);
  const std::size_t stride = static_cast<std::size_t>(cfg.stride);
  const std::size_t k3 = k * k * k;
  if (input.size() != r * r * r) throw ContractError("conv input must hold R^3 values");
  if (weights.size() != static_cast<std::size_t>(cfg.outputs) * k3) throw ContractError("conv weights must hold C_out*K^3 values");

  std::vector<float> out(static_cast<std::size_t>(cfg.outputs) * s * s * s);
  for (std::size_t o = 0; o < static_cast<std::size_t>(cfg.outputs); ++o) {
    const float* w = weights.data() + o * k3;
    for (std::size_t sz = 0; sz < s; ++sz) {
      for (std::size_t sy = 0; sy < s; ++sy) {
        for (std::size_t sx = 0; sx < s; ++sx) {
          float acc = 0.0f;
          for (std::size_t kz = 0; kz < k; ++kz) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              const float* row = input.data() + ((sz * stride + kz) * r + sy * stride + ky) * r + sx * stride;
              const float* wr = w + (kz * k + ky) * k;
              for (std::size_t kx = 0; kx < k; ++kx) acc += wr[kx] * row[kx];
            }
          }
          out[((o * s + sz) * s + sy) * s + sx] = acc;
        }
      }
    }
  }
  return out;
}

std::uint64_t conv_mac_count(const ConvConfig& cfg) noexcept {
  const std::uint64_t k = static_cast<std::uint64_t>(cfg.kernel), s = static_cast<std::uint64_t>(cfg.positions);
  return k * k * k * static_cast<std::uint64_t>(cfg.outputs) * s * s * s;
}

Timing time_it(const std::function<void()>& fn, int warmups, std::size_t min_reps, double min_total_ms) {
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < warmups; ++i) fn();
  std::vector<double> samples;
  double total = 0.0;
  while (samples.size() < min_reps || total < min_total_ms) {
    const auto t0 = clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    samples.push_back(ms);
    total += ms;
    if (samples.size() > 100000) break;
  }
  Timing t;
  t.reps = samples.size();
  t.mean_ms = total / static_cast<double>(t.reps);
  double var = 0.0;
  for (double s : samples) var += (s - t.mean_ms) * (s - t.mean_ms);
  t.std_ms = t.reps > 1 ? std::sqrt(var / static_cast<double>(t.reps - 1)) : 0.0;
  return t;
}

namespace {

field::Field3D sphere_field(int resolution, bool normals, std::uint64_t seed) {
  Rng rng(seed);
  const ingest::GridFrame frame{resolution, std::max(1.0, resolution / 16.0)};
  const auto shape = ingest::normalize(trainer::make_primitive(trainer::Primitive::sphere, 0.0, resolution, rng), frame);
  return field::build_input_field(ingest::voxelize(shape, resolution, ingest::kDefaultSamplesPerArea, seed), normals);
}

BenchRow bench_probing(int resolution, const BenchOptions& o) {
  const auto roles = trainer::channel_roles(o.normals);
  probing::InitConfig init{o.grid, o.filters_per_cell, o.points, 0.2, 0.8, o.seed};
  auto bank = probing::init_filter_bank<float>(init, resolution, roles.size());
  const probing::ProbingLayer<float> layer(static_cast<float>(0.1 * resolution), roles);
  const field::FieldSampler<float> sampler(sphere_field(resolution, o.normals, o.seed));
  const std::size_t batch = std::max<std::size_t>(1, o.batch);
  std::vector<probing::ProbingCache<float>> caches(batch);
  const std::vector<float> upstream(bank.filters(), 1.0f);

  const auto timing = time_it(
      [&] {
        parallel_for(batch, o.workers, [&](std::size_t b) { layer.forward(bank, sampler, caches[b]); });
        for (std::size_t b = 0; b < batch; ++b) layer.backward(bank, caches[b], upstream);
        bank.zero_gradients();
      },
      o.warmups, o.min_reps, o.min_total_ms);

  BenchRow row{resolution, "probing", timing, probing::mac_count(bank) * batch, 0};
  const std::uint64_t points = bank.filters() * bank.points();
  row.bytes = batch * (points * 8 * sampler.stride() * sizeof(float) +
                       points * (3 + bank.channels()) * sizeof(float) * 2);
  return row;
}

BenchRow bench_conv(int resolution, const BenchOptions& o) {
  const ConvConfig cfg = conv_for_resolution(o.conv, resolution, o.scaling);
  const auto f = sphere_field(resolution, false, o.seed);
  const std::vector<float> input(f.values().begin(), f.values().end());
  Rng rng(o.seed);
  std::vector<float> weights(static_cast<std::size_t>(cfg.outputs) * cfg.kernel * cfg.kernel * cfg.kernel);
  for (float& w : weights) w = static_cast<float>(uniform(rng, -0.1, 0.1));
  std::vector<float> sink;
  const auto timing = time_it([&] { sink = conv3d_reference(input, resolution, cfg, weights); }, o.warmups,
                              o.min_reps, o.min_total_ms);
  BenchRow row{resolution, "conv", timing, conv_mac_count(cfg), 0};
  row.bytes = (input.size() + weights.size() + sink.size()) * sizeof(float);
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (int r : options.resolutions) {
    rows.push_back(bench_probing(r, options));
    if (options.run_conv) rows.push_back(bench_conv(r, options));
  }
  return rows;
}

std::string machine_info() {
  std::string cpu = "unknown";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      cpu = line.substr(line.find(':') + 2);
      break;
    }
  }
  return cpu + "; threads=" + std::to_string(std::thread::hardware_concurrency()) +
         "; simd=" + std::string(simd::to_string(simd::active_isa()));
}

std::string format_bench_csv(const std::vector<BenchRow>& rows, const BenchOptions& options) {
  std::string out = "# machine: " + machine_info() + "\n";
  out += "# probing: C=" + std::to_string(options.grid * options.grid * options.grid * options.filters_per_cell) +
         " N=" + std::to_string(options.points) + " T=" + std::to_string(options.normals ? 4 : 1) +
         " batch=" + std::to_string(options.batch) + " workers=" + std::to_string(options.workers) + "\n";
  out += "# conv: K=" + std::to_string(options.conv.kernel) + " C_out=" + std::to_string(options.conv.outputs) +
         (options.scaling == ConvScaling::fixed_stride ? " fixed stride=" + std::to_string(options.conv.stride)
                                                        : " fixed S=" + std::to_string(options.conv.positions)) +
         "\n";
  out += "resolution,kind,mean_ms,std_ms,macs,bytes\n";
  char line[200];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%d,%s,%.6f,%.6f,%llu,%llu\n", r.resolution, r.kind.c_str(), r.timing.mean_ms,
                  r.timing.std_ms, static_cast<unsigned long long>(r.macs), static_cast<unsigned long long>(r.bytes));
    out += line;
  }
  return out;
}

}  // namespace fpnn::bench
