#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fpnn::field {

enum class ChannelRole : std::uint8_t { distance = 0, normal_x = 1, normal_y = 2, normal_z = 3, other = 4 };

std::string_view to_string(ChannelRole role) noexcept;

/// Dense cubic grid of T channels, stored channel-major then z, y, x fastest.
/// Node (i,j,k) sits at continuous location (i,j,k); the sampling domain is
/// [0, R-1]^3.
template <typename Real>
class BasicField3D {
 public:
  BasicField3D() = default;
  /// Zero-filled.
  BasicField3D(int resolution, std::vector<ChannelRole> roles);
  BasicField3D(int resolution, std::vector<ChannelRole> roles, std::vector<Real> values);

  int resolution() const noexcept { return resolution_; }
  std::size_t channels() const noexcept { return roles_.size(); }
  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<ChannelRole>& roles() const noexcept { return roles_; }

  std::size_t index(std::size_t c, int x, int y, int z) const noexcept {
    return c * node_count_ + (static_cast<std::size_t>(z) * resolution_ + y) * resolution_ + x;
  }
  Real at(std::size_t c, int x, int y, int z) const noexcept { return values_[index(c, x, y, z)]; }
  Real& at(std::size_t c, int x, int y, int z) noexcept { return values_[index(c, x, y, z)]; }

  std::span<const Real> values() const noexcept { return values_; }
  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> channel(std::size_t c) const noexcept {
    return std::span<const Real>(values_).subspan(c * node_count_, node_count_);
  }
  std::span<Real> channel(std::size_t c) noexcept {
    return std::span<Real>(values_).subspan(c * node_count_, node_count_);
  }

  /// Index of the first channel carrying `role`, or channels() if none.
  std::size_t find_role(ChannelRole role) const noexcept;

  /// Checks the container invariants: finite values, distance channels
  /// non-negative with a zero somewhere, normal triples unit-or-zero
  /// (within 1e-3). Throws ContractError naming the first violation.
  void validate() const;

  template <typename Other>
  BasicField3D<Other> cast() const {
    return BasicField3D<Other>(resolution_, roles_, std::vector<Other>(values_.begin(), values_.end()));
  }

  friend bool operator==(const BasicField3D&, const BasicField3D&) = default;

 private:
  int resolution_ = 0;
  std::size_t node_count_ = 0;
  std::vector<ChannelRole> roles_;
  std::vector<Real> values_;
};

using Field3D = BasicField3D<float>;

/// Stacks the channels of `a` then `b`. Resolutions must match.
template <typename Real>
BasicField3D<Real> concat(const BasicField3D<Real>& a, const BasicField3D<Real>& b);

}  // namespace fpnn::field
