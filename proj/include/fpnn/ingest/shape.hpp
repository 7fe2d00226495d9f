#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fpnn::ingest {

using Vec3 = std::array<double, 3>;
using Face = std::array<std::uint32_t, 3>;

/// A triangle mesh (faces non-empty) or point cloud (faces empty) with an
/// optional class label. Coordinates are in model units until normalized,
/// then in grid-frame voxel units.
struct ShapeSample {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  int label = -1;
  std::string id;

  bool is_point_cloud() const noexcept { return faces.empty(); }

  /// Throws DegenerateError for an empty vertex list, ContractError for a
  /// face index out of range.
  void validate() const;
};

/// ASCII OFF. The "OFF" keyword is optional; counts may share its line
/// ("OFF12 20 0" as found in some ModelNet files). Polygons are
/// fan-triangulated. Errors are ParseError with the offending line.
ShapeSample parse_off(std::string_view text);

/// Emits triangles only. Coordinates use shortest round-trip formatting, so
/// parse_off(write_off(s)) reproduces vertices exactly.
std::string write_off(const ShapeSample& shape);

/// One "x y z" per line; extra columns are ignored.
ShapeSample parse_xyz(std::string_view text);

/// Dispatches on extension (.off or .xyz/.pts/.txt) and sets `id` to `path`.
ShapeSample load_shape(const std::string& path);

/// Cubic voxel grid of `resolution` cells per axis covering [0, R]^3; voxel
/// (i,j,k) spans [i, i+1) x [j, j+1) x [k, k+1). Object size is the extent
/// of the longest axis after normalization.
struct GridFrame {
  int resolution = 32;
  double margin = 2.0;

  double center() const noexcept { return resolution / 2.0; }
  double object_size() const noexcept { return resolution - 2.0 * margin; }

  /// R >= 8 and 0 <= margin < R/4.
  void validate() const;
};

/// Centers the bounding box in the grid and uniformly scales the longest
/// axis to span [margin, R - margin]. Already-normalized input is returned
/// unchanged.
ShapeSample normalize(const ShapeSample& shape, const GridFrame& frame);

/// Axis-aligned bounding box as (min, max).
std::array<Vec3, 2> bounding_box(const ShapeSample& shape);

}  // namespace fpnn::ingest
