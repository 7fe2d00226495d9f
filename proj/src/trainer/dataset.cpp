#include "fpnn/trainer/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "fpnn/common/error.hpp"
#include "fpnn/common/rng.hpp"
#include "fpnn/field/distance.hpp"
#include "fpnn/field/field_io.hpp"
#include "fpnn/ingest/manifest.hpp"
#include "fpnn/ingest/voxelize.hpp"

namespace fpnn::trainer {

namespace fs = std::filesystem;

int Dataset::classes() const noexcept {
  int k = 0;
  for (const auto& s : shapes) k = std::max(k, s.label + 1);
  return k;
}

Dataset load_dataset(const std::string& manifest_path, const ingest::GridFrame& frame) {
  Dataset ds;
  for (const auto& entry : ingest::load_manifest(manifest_path)) {
    ingest::ShapeSample shape = ingest::normalize(ingest::load_shape(entry.path), frame);
    shape.label = entry.label;
    ds.shapes.push_back(std::move(shape));
  }
  if (ds.shapes.empty()) throw ConfigError(manifest_path + ": manifest lists no samples");
  return ds;
}

FieldSource::FieldSource(const TrainConfig& cfg)
    : frame_(cfg.frame()),
      normals_(cfg.normals),
      samples_per_area_(cfg.samples_per_area),
      cache_dir_(cfg.field_cache_dir) {}

field::Field3D FieldSource::build(const ingest::ShapeSample& shape, std::uint64_t voxel_seed) const {
  const auto grid = ingest::voxelize(shape, frame_.resolution, samples_per_area_, voxel_seed);
  return field::build_input_field(grid, normals_);
}

std::string FieldSource::cache_path(const ingest::ShapeSample& shape) const {
  const std::uint64_t key = derive_seed(hash_string(shape.id), {static_cast<std::uint64_t>(frame_.resolution),
                                                                normals_ ? 4u : 1u,
                                                                hash_string(std::to_string(samples_per_area_))});
  char name[64];
  std::snprintf(name, sizeof name, "%016llx.fpf", static_cast<unsigned long long>(key));
  return (fs::path(cache_dir_) / name).string();
}

std::shared_ptr<const field::Field3D> FieldSource::unperturbed(const ingest::ShapeSample& shape) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(shape.id); it != memory_.end()) return it->second;
  }
  std::shared_ptr<const field::Field3D> f;
  const std::string path = cache_dir_.empty() ? std::string() : cache_path(shape);
  if (!path.empty() && fs::exists(path)) {
    f = std::make_shared<field::Field3D>(field::read_field(path));
  } else {
    f = std::make_shared<field::Field3D>(build(shape, hash_string(shape.id)));
    if (!path.empty()) {
      fs::create_directories(cache_dir_);
      const std::string tmp = path + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
      field::write_field(*f, tmp);
      fs::rename(tmp, path);
    }
  }
  std::lock_guard lock(mutex_);
  return memory_.emplace(shape.id, f).first->second;
}

field::Field3D FieldSource::perturbed(const ingest::ShapeSample& shape, const ingest::Perturbation& p,
                                      std::uint64_t voxel_seed) const {
  return build(ingest::apply_perturbation(shape, p, frame_), voxel_seed);
}

std::shared_ptr<const field::Field3D> FieldSource::get(const ingest::ShapeSample& shape, ingest::PerturbMode mode,
                                                       std::uint64_t seed) {
  if (mode.empty()) return unperturbed(shape);
  Rng rng(seed);
  const auto p = ingest::Perturbation::sample(mode, rng);
  return std::make_shared<field::Field3D>(perturbed(shape, p, rng()));
}

}  // namespace fpnn::trainer
