#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fpnn/ingest/voxelize.hpp"

namespace fpnn::testing {

/// Squared distance from every cell to the nearest occupied cell by
/// exhaustive search.
inline std::vector<std::int64_t> brute_force_sq_edt(const ingest::OccupancyGrid& grid) {
  const int r = grid.resolution;
  std::vector<std::array<int, 3>> sites;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x)
        if (grid.occupied(x, y, z)) sites.push_back({x, y, z});
  std::vector<std::int64_t> out(grid.bits.size(), std::numeric_limits<std::int64_t>::max());
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (const auto& s : sites) {
          const std::int64_t dx = x - s[0], dy = y - s[1], dz = z - s[2];
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        out[grid.index(x, y, z)] = best;
      }
  return out;
}

using P3 = std::array<double, 3>;

inline P3 sub(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline P3 cross(const P3& a, const P3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot3(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Separating-axis test between a triangle and an axis-aligned box given
/// by center and half extents (13 axes: 3 box normals, triangle normal,
/// 9 edge cross products). Touching counts as overlap.
inline bool triangle_box_overlap(const P3& center, const P3& half, const std::array<P3, 3>& tri) {
  const std::array<P3, 3> v = {sub(tri[0], center), sub(tri[1], center), sub(tri[2], center)};
  const std::array<P3, 3> e = {sub(v[1], v[0]), sub(v[2], v[1]), sub(v[0], v[2])};
  const auto separated = [&](const P3& axis) {
    const double p0 = dot3(v[0], axis), p1 = dot3(v[1], axis), p2 = dot3(v[2], axis);
    const double r = half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) + half[2] * std::abs(axis[2]);
    return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
  };
  const std::array<P3, 3> unit = {P3{1, 0, 0}, P3{0, 1, 0}, P3{0, 0, 1}};
  for (const auto& u : unit)
    if (separated(u)) return false;
  if (separated(cross(e[0], e[1]))) return false;
  for (const auto& u : unit)
    for (const auto& ed : e) {
      const P3 axis = cross(u, ed);
      if (dot3(axis, axis) > 0 && separated(axis)) return false;
    }
  return true;
}

/// Cells whose open interior a triangle mesh passes through.
inline ingest::OccupancyGrid exact_surface_cells(const ingest::ShapeSample& shape, int r, double shrink = 1e-9) {
  ingest::OccupancyGrid g(r);
  for (const auto& f : shape.faces) {
    const std::array<P3, 3> tri = {shape.vertices[f[0]], shape.vertices[f[1]], shape.vertices[f[2]]};
    for (int z = 0; z < r; ++z)
      for (int y = 0; y < r; ++y)
        for (int x = 0; x < r; ++x)
          if (triangle_box_overlap({x + 0.5, y + 0.5, z + 0.5}, {0.5 - shrink, 0.5 - shrink, 0.5 - shrink}, tri))
            g.set(x, y, z);
  }
  return g;
}

/// Dense 3D convolution written as a sum over every input voxel, keeping
/// those that fall inside each output's window.
inline std::vector<double> brute_force_conv(const std::vector<float>& input, int r, int k, int s, int stride,
                                            int outputs, const std::vector<float>& weights) {
  std::vector<double> out(static_cast<std::size_t>(outputs) * s * s * s, 0.0);
  for (int o = 0; o < outputs; ++o)
    for (int oz = 0; oz < s; ++oz)
      for (int oy = 0; oy < s; ++oy)
        for (int ox = 0; ox < s; ++ox) {
          double acc = 0.0;
          for (int z = 0; z < r; ++z)
            for (int y = 0; y < r; ++y)
              for (int x = 0; x < r; ++x) {
                const int kz = z - oz * stride, ky = y - oy * stride, kx = x - ox * stride;
                if (kz < 0 || ky < 0 || kx < 0 || kz >= k || ky >= k || kx >= k) continue;
                acc += static_cast<double>(weights[((o * k + kz) * k + ky) * k + kx]) *
                       input[(static_cast<std::size_t>(z) * r + y) * r + x];
              }
          out[((static_cast<std::size_t>(o) * s + oz) * s + oy) * s + ox] = acc;
        }
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("fpnn_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fpnn::testing
