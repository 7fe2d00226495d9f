#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fpnn/common/rng.hpp"
#include "fpnn/ingest/shape.hpp"

namespace fpnn::trainer {

enum class Primitive { sphere, box, cylinder, torus, cone };

std::string to_string(Primitive p);
Primitive parse_primitive(std::string_view name);

/// Desk-scale stand-in dataset of analytic primitives.
struct SyntheticSpec {
  std::vector<Primitive> classes = {Primitive::sphere, Primitive::box, Primitive::cylinder, Primitive::torus,
                                    Primitive::cone};
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 20;
  std::uint64_t seed = 1;
  int resolution = 32;  // target grid; sets tessellation density
  double jitter = 0.25; // relative range of the shape parameters

  /// Throws ConfigError unless there are >= 2 distinct classes, counts are
  /// positive and 0 <= jitter < 0.5.
  void validate() const;
};

/// "key = value" lines: classes (comma list), train_per_class,
/// test_per_class, seed, resolution, jitter.
SyntheticSpec parse_synthetic_spec(std::string_view text);

/// One primitive mesh in model units, parameters jittered from `rng`.
ingest::ShapeSample make_primitive(Primitive p, double jitter, int resolution, Rng& rng);

struct SyntheticOutput {
  std::string train_manifest;
  std::string test_manifest;
  std::size_t files = 0;
};

/// Writes shapes/<class>/<split>_<index>.off under `out_dir` plus train.txt
/// and test.txt manifests. Labels follow the order of spec.classes. Each
/// file's parameters come from a seed derived from (seed, split, class,
/// index), so output is byte-identical for a given spec.
SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace fpnn::trainer
