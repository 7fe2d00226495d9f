#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fpnn/ingest/shape.hpp"

namespace fpnn::ingest {

/// Binary R^3 occupancy, z-major then y, x fastest.
struct OccupancyGrid {
  int resolution = 0;
  std::vector<std::uint8_t> bits;

  OccupancyGrid() = default;
  explicit OccupancyGrid(int r) : resolution(r), bits(static_cast<std::size_t>(r) * r * r, 0) {}

  std::size_t index(int x, int y, int z) const noexcept {
    return (static_cast<std::size_t>(z) * resolution + y) * resolution + x;
  }
  bool occupied(int x, int y, int z) const noexcept { return bits[index(x, y, z)] != 0; }
  void set(int x, int y, int z) noexcept { bits[index(x, y, z)] = 1; }

  std::size_t count() const noexcept;
  double density() const noexcept;
};

constexpr double kDefaultSamplesPerArea = 8.0;

/// Surface occupancy of a normalized shape. Meshes are sampled uniformly at
/// `samples_per_area` points per unit voxel-face area (at least one per
/// triangle, plus every vertex); point clouds bin their points directly.
/// Samples outside [0, R)^3 are dropped. Throws DegenerateError if nothing
/// lands inside the grid.
OccupancyGrid voxelize(const ShapeSample& shape, int resolution, double samples_per_area = kDefaultSamplesPerArea,
                       std::uint64_t seed = 0);

}  // namespace fpnn::ingest
