#pragma once

#include <array>
#include <string>
#include <string_view>

#include "fpnn/common/rng.hpp"
#include "fpnn/ingest/shape.hpp"

namespace fpnn::ingest {

/// Set of perturbation protocols, written "R15+T01+S" and so on.
///   R    random rotation about the up (z) axis
///   R15  R plus tilts in (-15, 15) degrees about x and y
///   R45  R plus tilts in (-45, 45) degrees
///   T01  translation in (-0.1, 0.1) of the object size per axis
///   T02  translation in (-0.2, 0.2)
///   S    per-axis scaling in (0.9, 1.1)
class PerturbMode {
 public:
  enum Flag : unsigned {
    kRotateUp = 1u << 0,
    kTilt15 = 1u << 1,
    kTilt45 = 1u << 2,
    kTranslate01 = 1u << 3,
    kTranslate02 = 1u << 4,
    kScale = 1u << 5,
  };

  constexpr PerturbMode() = default;
  constexpr explicit PerturbMode(unsigned flags) : flags_(flags) {}

  /// "none" and "" parse to the empty set. Throws ConfigError on unknown
  /// or conflicting tokens.
  static PerturbMode parse(std::string_view text);

  std::string to_string() const;
  bool empty() const noexcept { return flags_ == 0; }
  bool has(Flag f) const noexcept { return (flags_ & f) != 0; }
  unsigned flags() const noexcept { return flags_; }

  /// Bound of the open tilt interval in radians (0 when no tilt).
  double tilt_limit() const noexcept;
  /// Bound of the open translation interval in object-size fractions.
  double translation_limit() const noexcept;

  friend bool operator==(PerturbMode, PerturbMode) = default;

 private:
  unsigned flags_ = 0;
};

/// One concrete draw of a perturbation protocol. Construction validates
/// every parameter against the ranges its mode allows.
class Perturbation {
 public:
  struct Params {
    double up_rotation = 0.0;                 // radians about z
    std::array<double, 2> tilt = {0.0, 0.0};  // radians about x, then y
    std::array<double, 3> translation = {0.0, 0.0, 0.0};
    std::array<double, 3> scale = {1.0, 1.0, 1.0};
  };

  Perturbation() = default;
  Perturbation(PerturbMode mode, const Params& params);

  static Perturbation sample(PerturbMode mode, Rng& rng);

  PerturbMode mode() const noexcept { return mode_; }
  const Params& params() const noexcept { return params_; }
  bool is_identity() const noexcept;

 private:
  PerturbMode mode_;
  Params params_;
};

/// Applies the transform about the grid center: scale, tilt about x, tilt
/// about y, rotation about z, then translation in units of object size.
/// Vertices may leave the grid; voxelization drops what falls outside.
ShapeSample apply_perturbation(const ShapeSample& shape, const Perturbation& p, const GridFrame& frame);

}  // namespace fpnn::ingest
