#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fpnn/field/field.hpp"
#include "fpnn/ingest/perturbation.hpp"
#include "fpnn/ingest/shape.hpp"
#include "fpnn/trainer/config.hpp"

namespace fpnn::trainer {

/// Shapes of one manifest, normalized into the grid frame and labelled.
struct Dataset {
  std::vector<ingest::ShapeSample> shapes;

  std::size_t size() const noexcept { return shapes.size(); }
  /// 1 + largest label.
  int classes() const noexcept;
};

Dataset load_dataset(const std::string& manifest_path, const ingest::GridFrame& frame);

/// Turns shapes into input fields: perturb -> voxelize -> distance (and
/// normal) fields. Unperturbed fields are cached in memory, and on disk in
/// FPF1 format when a cache directory is configured. Shapes themselves are
/// never modified. Safe to call from several threads.
class FieldSource {
 public:
  explicit FieldSource(const TrainConfig& cfg);

  std::shared_ptr<const field::Field3D> unperturbed(const ingest::ShapeSample& shape);
  field::Field3D perturbed(const ingest::ShapeSample& shape, const ingest::Perturbation& p,
                           std::uint64_t voxel_seed) const;

  /// Perturbation drawn from `mode` with `seed`; the unperturbed cached
  /// field when `mode` is empty.
  std::shared_ptr<const field::Field3D> get(const ingest::ShapeSample& shape, ingest::PerturbMode mode,
                                            std::uint64_t seed);

  std::string cache_path(const ingest::ShapeSample& shape) const;

 private:
  field::Field3D build(const ingest::ShapeSample& shape, std::uint64_t voxel_seed) const;

  ingest::GridFrame frame_;
  bool normals_;
  double samples_per_area_;
  std::string cache_dir_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const field::Field3D>> memory_;
};

}  // namespace fpnn::trainer
