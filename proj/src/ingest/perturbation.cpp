#include "fpnn/ingest/perturbation.hpp"

#include <cmath>
#include <numbers>

#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::ingest {

namespace {
constexpr double kDegree = std::numbers::pi / 180.0;
}

PerturbMode PerturbMode::parse(std::string_view text) {
  text = trim(text);
  if (text.empty() || text == "none") return PerturbMode{};
  unsigned flags = 0;
  for (auto tok : split(text, '+')) {
    tok = trim(tok);
    if (tok == "R") {
      flags |= kRotateUp;
    } else if (tok == "R15") {
      flags |= kRotateUp | kTilt15;
    } else if (tok == "R45") {
      flags |= kRotateUp | kTilt45;
    } else if (tok == "T01" || tok == "T0.1") {
      flags |= kTranslate01;
    } else if (tok == "T02" || tok == "T0.2") {
      flags |= kTranslate02;
    } else if (tok == "S") {
      flags |= kScale;
    } else {
      throw ConfigError("unknown perturbation '" + std::string(tok) + "'");
    }
  }
  if ((flags & kTilt15) && (flags & kTilt45)) throw ConfigError("R15 and R45 are exclusive");
  if ((flags & kTranslate01) && (flags & kTranslate02)) throw ConfigError("T01 and T02 are exclusive");
  return PerturbMode{flags};
}

std::string PerturbMode::to_string() const {
  if (empty()) return "none";
  std::string out;
  const auto add = [&](const char* s) {
    if (!out.empty()) out += '+';
    out += s;
  };
  if (has(kTilt15)) {
    add("R15");
  } else if (has(kTilt45)) {
    add("R45");
  } else if (has(kRotateUp)) {
    add("R");
  }
  if (has(kTranslate01)) add("T01");
  if (has(kTranslate02)) add("T02");
  if (has(kScale)) add("S");
  return out;
}

double PerturbMode::tilt_limit() const noexcept {
  if (has(kTilt15)) return 15.0 * kDegree;
  if (has(kTilt45)) return 45.0 * kDegree;
  return 0.0;
}

double PerturbMode::translation_limit() const noexcept {
  if (has(kTranslate01)) return 0.1;
  if (has(kTranslate02)) return 0.2;
  return 0.0;
}

Perturbation::Perturbation(PerturbMode mode, const Params& params) : mode_(mode), params_(params) {
  const auto check_open = [](double v, double limit, const char* what) {
    if (limit == 0.0) {
      if (v != 0.0) throw ConfigError(std::string(what) + " not enabled by perturbation mode");
    } else if (!(v > -limit && v < limit)) {
      throw ConfigError(std::string(what) + " " + format_double(v) + " outside (-" + format_double(limit) + ", " +
                        format_double(limit) + ")");
    }
  };
  if (!std::isfinite(params.up_rotation) || (!mode.has(PerturbMode::kRotateUp) && params.up_rotation != 0.0)) {
    throw ConfigError("up-axis rotation not enabled by perturbation mode");
  }
  for (double t : params.tilt) check_open(t, mode.tilt_limit(), "tilt");
  for (double t : params.translation) check_open(t, mode.translation_limit(), "translation");
  for (double s : params.scale) {
    if (mode.has(PerturbMode::kScale)) {
      if (!(s > 0.9 && s < 1.1)) throw ConfigError("scale " + format_double(s) + " outside (0.9, 1.1)");
    } else if (s != 1.0) {
      throw ConfigError("scale not enabled by perturbation mode");
    }
  }
}

Perturbation Perturbation::sample(PerturbMode mode, Rng& rng) {
  Params p;
  if (mode.has(PerturbMode::kRotateUp)) p.up_rotation = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  if (const double lim = mode.tilt_limit(); lim > 0.0) {
    for (auto& t : p.tilt) t = uniform_open(rng, -lim, lim);
  }
  if (const double lim = mode.translation_limit(); lim > 0.0) {
    for (auto& t : p.translation) t = uniform_open(rng, -lim, lim);
  }
  if (mode.has(PerturbMode::kScale)) {
    for (auto& s : p.scale) s = uniform_open(rng, 0.9, 1.1);
  }
  return Perturbation(mode, p);
}

bool Perturbation::is_identity() const noexcept {
  return params_.up_rotation == 0.0 && params_.tilt == std::array<double, 2>{0.0, 0.0} &&
         params_.translation == std::array<double, 3>{0.0, 0.0, 0.0} &&
         params_.scale == std::array<double, 3>{1.0, 1.0, 1.0};
}

namespace {

/// Rotates (a, b) in place by angle; used for the plane perpendicular to an axis.
void rotate_pair(double& a, double& b, double cos_t, double sin_t) {
  const double na = cos_t * a - sin_t * b;
  const double nb = sin_t * a + cos_t * b;
  a = na;
  b = nb;
}

}  // namespace

ShapeSample apply_perturbation(const ShapeSample& shape, const Perturbation& p, const GridFrame& frame) {
  if (p.is_identity()) return shape;
  const auto& prm = p.params();
  const double c = frame.center();
  const double size = frame.object_size();
  const bool scaled = prm.scale != std::array<double, 3>{1.0, 1.0, 1.0};
  const double cx = std::cos(prm.tilt[0]), sx = std::sin(prm.tilt[0]);
  const double cy = std::cos(prm.tilt[1]), sy = std::sin(prm.tilt[1]);
  const double cz = std::cos(prm.up_rotation), sz = std::sin(prm.up_rotation);

  ShapeSample out = shape;
  for (auto& v : out.vertices) {
    Vec3 d = {v[0] - c, v[1] - c, v[2] - c};
    if (scaled) {
      for (int a = 0; a < 3; ++a) d[a] *= prm.scale[a];
    }
    if (prm.tilt[0] != 0.0) rotate_pair(d[1], d[2], cx, sx);  // about x
    if (prm.tilt[1] != 0.0) rotate_pair(d[2], d[0], cy, sy);  // about y
    if (prm.up_rotation != 0.0) rotate_pair(d[0], d[1], cz, sz);
    for (int a = 0; a < 3; ++a) v[a] = d[a] + c + prm.translation[a] * size;
  }
  return out;
}

}  // namespace fpnn::ingest
