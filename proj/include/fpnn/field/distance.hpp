#pragma once

#include <cstdint>
#include <vector>

#include "fpnn/field/field.hpp"
#include "fpnn/ingest/voxelize.hpp"

namespace fpnn::field {

/// Exact squared Euclidean distance (in voxels) from every cell to the
/// nearest occupied cell, by three 1-D lower-envelope-of-parabolas passes.
/// Same layout as the grid. Throws DegenerateError on an empty grid.
std::vector<std::int64_t> squared_distance_transform(const ingest::OccupancyGrid& grid);

/// Single distance-role channel holding sqrt of the squared transform.
Field3D distance_transform(const ingest::OccupancyGrid& grid);

/// Per-axis finite differences of one channel: central (spacing 2) inside,
/// one-sided on boundary nodes. Output channels are d/dx, d/dy, d/dz.
template <typename Real>
BasicField3D<Real> gradient_field(const BasicField3D<Real>& field, std::size_t channel);

/// Normalized gradient of the first distance-role channel. Nodes whose
/// gradient magnitude is below 1e-8 get the zero vector.
template <typename Real>
BasicField3D<Real> normal_field(const BasicField3D<Real>& distance);

/// Distance field, optionally followed by its three normal channels (T=4).
Field3D build_input_field(const ingest::OccupancyGrid& grid, bool with_normals);

}  // namespace fpnn::field
