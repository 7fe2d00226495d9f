#include "fpnn/field/field.hpp"

#include <cmath>
#include <string>

#include "fpnn/common/error.hpp"

namespace fpnn::field {

std::string_view to_string(ChannelRole role) noexcept {
  switch (role) {
    case ChannelRole::distance:
      return "distance";
    case ChannelRole::normal_x:
      return "normal_x";
    case ChannelRole::normal_y:
      return "normal_y";
    case ChannelRole::normal_z:
      return "normal_z";
    case ChannelRole::other:
      return "other";
  }
  return "unknown";
}

template <typename Real>
BasicField3D<Real>::BasicField3D(int resolution, std::vector<ChannelRole> roles)
    : BasicField3D(resolution, roles,
                   std::vector<Real>(static_cast<std::size_t>(resolution) * resolution * resolution * roles.size())) {}

template <typename Real>
BasicField3D<Real>::BasicField3D(int resolution, std::vector<ChannelRole> roles, std::vector<Real> values)
    : resolution_(resolution),
      node_count_(static_cast<std::size_t>(resolution) * resolution * resolution),
      roles_(std::move(roles)),
      values_(std::move(values)) {
  if (resolution < 1) throw ContractError("field resolution must be positive");
  if (roles_.empty()) throw ContractError("field needs at least one channel");
  if (values_.size() != node_count_ * roles_.size()) {
    throw ContractError("field payload has " + std::to_string(values_.size()) + " values, expected " +
                        std::to_string(node_count_ * roles_.size()));
  }
}

template <typename Real>
std::size_t BasicField3D<Real>::find_role(ChannelRole role) const noexcept {
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == role) return c;
  }
  return roles_.size();
}

template <typename Real>
void BasicField3D<Real>::validate() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(static_cast<double>(values_[i]))) {
      throw ContractError("non-finite field value at flat index " + std::to_string(i));
    }
  }
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] != ChannelRole::distance) continue;
    bool has_zero = false;
    for (Real v : channel(c)) {
      if (v < 0) throw ContractError("negative distance in channel " + std::to_string(c));
      has_zero = has_zero || v == 0;
    }
    if (!has_zero) throw ContractError("distance channel " + std::to_string(c) + " has no zero level set");
  }
  const std::size_t nx = find_role(ChannelRole::normal_x);
  const std::size_t ny = find_role(ChannelRole::normal_y);
  const std::size_t nz = find_role(ChannelRole::normal_z);
  if (nx < channels() && ny < channels() && nz < channels()) {
    for (std::size_t i = 0; i < node_count_; ++i) {
      const double x = channel(nx)[i], y = channel(ny)[i], z = channel(nz)[i];
      const double n2 = x * x + y * y + z * z;
      if (n2 != 0.0 && std::abs(n2 - 1.0) > 1e-3) {
        throw ContractError("normal at node " + std::to_string(i) + " is neither unit nor zero");
      }
    }
  }
}

template <typename Real>
BasicField3D<Real> concat(const BasicField3D<Real>& a, const BasicField3D<Real>& b) {
  if (a.resolution() != b.resolution()) throw ContractError("cannot stack fields of different resolution");
  auto roles = a.roles();
  roles.insert(roles.end(), b.roles().begin(), b.roles().end());
  std::vector<Real> values(a.values().begin(), a.values().end());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return BasicField3D<Real>(a.resolution(), std::move(roles), std::move(values));
}

template class BasicField3D<float>;
template class BasicField3D<double>;
template BasicField3D<float> concat(const BasicField3D<float>&, const BasicField3D<float>&);
template BasicField3D<double> concat(const BasicField3D<double>&, const BasicField3D<double>&);

}  // namespace fpnn::field
