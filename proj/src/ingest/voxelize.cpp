#include "fpnn/ingest/voxelize.hpp"

#include <algorithm>
#include <cmath>

#include "fpnn/common/error.hpp"
#include "fpnn/common/rng.hpp"

namespace fpnn::ingest {

std::size_t OccupancyGrid::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double OccupancyGrid::density() const noexcept {
  return bits.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(bits.size());
}

namespace {

void mark(OccupancyGrid& grid, const Vec3& p) {
  const double r = grid.resolution;
  if (!(p[0] >= 0.0 && p[0] < r && p[1] >= 0.0 && p[1] < r && p[2] >= 0.0 && p[2] < r)) return;
  grid.set(static_cast<int>(p[0]), static_cast<int>(p[1]), static_cast<int>(p[2]));
}

}  // namespace

OccupancyGrid voxelize(const ShapeSample& shape, int resolution, double samples_per_area, std::uint64_t seed) {
  if (shape.vertices.empty()) throw DegenerateError("cannot voxelize an empty shape");
  if (resolution < 1) throw ConfigError("resolution must be positive");
  if (!(samples_per_area > 0.0)) throw ConfigError("samples_per_area must be positive");
  shape.validate();

  OccupancyGrid grid(resolution);
  for (const auto& v : shape.vertices) mark(grid, v);

  Rng rng(seed);
  for (const auto& f : shape.faces) {
    const Vec3& a = shape.vertices[f[0]];
    const Vec3& b = shape.vertices[f[1]];
    const Vec3& c = shape.vertices[f[2]];
    const Vec3 e1 = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 e2 = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 n = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]};
    const double area = 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    const auto samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(area * samples_per_area)));
    for (std::size_t s = 0; s < samples; ++s) {
      // Uniform over the triangle: sqrt warp of the first barycentric draw.
      const double r1 = std::sqrt(uniform(rng, 0.0, 1.0));
      const double r2 = uniform(rng, 0.0, 1.0);
      const double u = r1 * (1.0 - r2);
      const double w = r1 * r2;
      mark(grid, {a[0] + u * e1[0] + w * e2[0], a[1] + u * e1[1] + w * e2[1], a[2] + u * e1[2] + w * e2[2]});
    }
  }
  if (grid.count() == 0) throw DegenerateError("voxelization produced an empty grid");
  return grid;
}

}  // namespace fpnn::ingest
