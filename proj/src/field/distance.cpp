#include "fpnn/field/distance.hpp"

#include <cmath>
#include <limits>

#include "fpnn/common/error.hpp"

namespace fpnn::field {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

/// 1-D squared distance transform of a sampled function (Felzenszwalb &
/// Huttenlocher). Sites with f == kInf are absent. `v` and `z` are scratch
/// of size n and n+1.
void edt_line(const std::int64_t* f, std::int64_t* d, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      const auto num = static_cast<double>((f[q] + std::int64_t{q} * q) - (f[p] + std::int64_t{p} * p));
      s = num / (2.0 * (q - p));
      if (s <= z[k]) {
        --k;  // z[0] is -inf, so k never drops below 0 here
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const std::int64_t dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const ingest::OccupancyGrid& grid) {
  const int r = grid.resolution;
  if (grid.count() == 0) throw DegenerateError("distance transform of an empty occupancy grid");
  const auto idx = [r](int x, int y, int z) { return (static_cast<std::size_t>(z) * r + y) * r + x; };

  std::vector<std::int64_t> dist(grid.bits.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = grid.bits[i] ? 0 : kInf;

  std::vector<std::int64_t> f(r), d(r);
  std::vector<int> v(r);
  std::vector<double> z(r + 1);
  // Pass order x, y, z; each pass gathers a line, transforms, scatters back.
  for (int axis = 0; axis < 3; ++axis) {
    for (int a = 0; a < r; ++a) {
      for (int b = 0; b < r; ++b) {
        for (int q = 0; q < r; ++q) {
          const std::size_t i = axis == 0 ? idx(q, a, b) : axis == 1 ? idx(a, q, b) : idx(a, b, q);
          f[q] = dist[i];
        }
        edt_line(f.data(), d.data(), r, v, z);
        for (int q = 0; q < r; ++q) {
          const std::size_t i = axis == 0 ? idx(q, a, b) : axis == 1 ? idx(a, q, b) : idx(a, b, q);
          dist[i] = d[q];
        }
      }
    }
  }
  return dist;
}

Field3D distance_transform(const ingest::OccupancyGrid& grid) {
  const auto sq = squared_distance_transform(grid);
  std::vector<float> values(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) values[i] = static_cast<float>(std::sqrt(static_cast<double>(sq[i])));
  return Field3D(grid.resolution, {ChannelRole::distance}, std::move(values));
}

template <typename Real>
BasicField3D<Real> gradient_field(const BasicField3D<Real>& field, std::size_t channel) {
  if (channel >= field.channels()) throw ContractError("gradient_field: channel out of range");
  const int r = field.resolution();
  if (r < 2) throw ContractError("gradient_field needs resolution >= 2");
  BasicField3D<Real> out(r, {ChannelRole::other, ChannelRole::other, ChannelRole::other});

  const auto diff = [&](int x, int y, int z, int axis) -> Real {
    int p[3] = {x, y, z};
    const int at = p[axis];
    int lo = at - 1, hi = at + 1;
    Real span = 2;
    if (at == 0) {
      lo = 0;
      span = 1;
    } else if (at == r - 1) {
      hi = r - 1;
      span = 1;
    }
    p[axis] = hi;
    const Real fh = field.at(channel, p[0], p[1], p[2]);
    p[axis] = lo;
    const Real fl = field.at(channel, p[0], p[1], p[2]);
    return (fh - fl) / span;
  };

  for (int z = 0; z < r; ++z) {
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        for (int axis = 0; axis < 3; ++axis) out.at(axis, x, y, z) = diff(x, y, z, axis);
      }
    }
  }
  return out;
}

template <typename Real>
BasicField3D<Real> normal_field(const BasicField3D<Real>& distance) {
  const std::size_t c = distance.find_role(ChannelRole::distance);
  if (c == distance.channels()) throw ContractError("normal_field needs a distance channel");
  auto grad = gradient_field(distance, c);
  BasicField3D<Real> out(distance.resolution(), {ChannelRole::normal_x, ChannelRole::normal_y, ChannelRole::normal_z});
  const std::size_t n = distance.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double gx = grad.channel(0)[i], gy = grad.channel(1)[i], gz = grad.channel(2)[i];
    const double l = std::sqrt(gx * gx + gy * gy + gz * gz);
    if (l < 1e-8) continue;
    out.channel(0)[i] = static_cast<Real>(gx / l);
    out.channel(1)[i] = static_cast<Real>(gy / l);
    out.channel(2)[i] = static_cast<Real>(gz / l);
  }
  return out;
}

Field3D build_input_field(const ingest::OccupancyGrid& grid, bool with_normals) {
  auto dist = distance_transform(grid);
  if (!with_normals) return dist;
  return concat(dist, normal_field(dist));
}

template BasicField3D<float> gradient_field(const BasicField3D<float>&, std::size_t);
template BasicField3D<double> gradient_field(const BasicField3D<double>&, std::size_t);
template BasicField3D<float> normal_field(const BasicField3D<float>&);
template BasicField3D<double> normal_field(const BasicField3D<double>&);

}  // namespace fpnn::field
