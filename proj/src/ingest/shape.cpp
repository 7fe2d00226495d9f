#include "fpnn/ingest/shape.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::ingest {

void ShapeSample::validate() const {
  if (vertices.empty()) throw DegenerateError("shape '" + id + "' has no vertices");
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto idx : faces[f]) {
      if (idx >= n) {
        throw ContractError("shape '" + id + "': face " + std::to_string(f) + " index " + std::to_string(idx) +
                            " out of range for " + std::to_string(n) + " vertices");
      }
    }
  }
}

namespace {

/// Content lines with their 1-based numbers; comments and blanks removed.
struct ContentLines {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t total = 0;

  explicit ContentLines(std::string_view text) {
    const auto raw = split_lines(text);
    total = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      std::string_view line = raw[i];
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (!line.empty()) lines.emplace_back(i + 1, line);
    }
  }
};

double parse_coord(std::string_view tok, std::size_t line) {
  const auto v = parse_double(tok);
  if (!v || !std::isfinite(*v)) throw ParseError(line, "non-numeric value '" + std::string(tok) + "'");
  return *v;
}

long long parse_count(std::string_view tok, std::size_t line, const char* what) {
  const auto v = parse_int(tok);
  if (!v || *v < 0) throw ParseError(line, std::string("malformed OFF header: bad ") + what + " '" + std::string(tok) + "'");
  return *v;
}

}  // namespace

ShapeSample parse_off(std::string_view text) {
  const ContentLines content(text);
  auto it = content.lines.begin();
  const auto end = content.lines.end();
  if (it == end) throw ParseError(1, "malformed OFF header: empty file");

  std::vector<std::string_view> counts;
  std::size_t header_line = it->first;
  if (it->second.starts_with("OFF")) {
    const auto rest = trim(it->second.substr(3));
    if (!rest.empty()) {
      counts = split_ws(rest);
    } else {
      ++it;
      if (it == end) throw ParseError(header_line + 1, "malformed OFF header: missing counts");
      header_line = it->first;
      counts = split_ws(it->second);
    }
  } else {
    counts = split_ws(it->second);
  }
  if (counts.size() < 2 || counts.size() > 3) {
    throw ParseError(header_line, "malformed OFF header: expected 'vertices faces [edges]'");
  }
  const auto nv = static_cast<std::size_t>(parse_count(counts[0], header_line, "vertex count"));
  const auto nf = static_cast<std::size_t>(parse_count(counts[1], header_line, "face count"));
  if (counts.size() == 3) parse_count(counts[2], header_line, "edge count");
  if (nv == 0) throw ParseError(header_line, "OFF file declares no vertices");
  ++it;

  const auto truncated = [&](const char* what, std::size_t expected, std::size_t got) {
    return ParseError(content.total + 1, std::string("truncated file: expected ") + std::to_string(expected) + " " +
                                             what + ", got " + std::to_string(got));
  };

  ShapeSample shape;
  shape.vertices.reserve(nv);
  for (std::size_t v = 0; v < nv; ++v, ++it) {
    if (it == end) throw truncated("vertices", nv, v);
    const auto toks = split_ws(it->second);
    if (toks.size() < 3) throw ParseError(it->first, "vertex needs 3 coordinates");
    shape.vertices.push_back({parse_coord(toks[0], it->first), parse_coord(toks[1], it->first),
                              parse_coord(toks[2], it->first)});
  }

  shape.faces.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f, ++it) {
    if (it == end) throw truncated("faces", nf, f);
    const auto toks = split_ws(it->second);
    const auto k = parse_int(toks.front());
    if (!k || *k < 3) throw ParseError(it->first, "face must have at least 3 vertices");
    if (toks.size() < static_cast<std::size_t>(*k) + 1) throw ParseError(it->first, "face lists fewer indices than declared");
    std::vector<std::uint32_t> poly(static_cast<std::size_t>(*k));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto idx = parse_int(toks[i + 1]);
      if (!idx) throw ParseError(it->first, "non-numeric face index '" + std::string(toks[i + 1]) + "'");
      if (*idx < 0 || static_cast<std::size_t>(*idx) >= nv) {
        throw ParseError(it->first, "face index " + std::to_string(*idx) + " out of range (" + std::to_string(nv) +
                                        " vertices)");
      }
      poly[i] = static_cast<std::uint32_t>(*idx);
    }
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) shape.faces.push_back({poly[0], poly[i], poly[i + 1]});
  }
  return shape;
}

std::string write_off(const ShapeSample& shape) {
  std::string out = "OFF\n";
  out += std::to_string(shape.vertices.size()) + " " + std::to_string(shape.faces.size()) + " 0\n";
  for (const auto& v : shape.vertices) {
    out += format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]) + "\n";
  }
  for (const auto& f : shape.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

ShapeSample parse_xyz(std::string_view text) {
  ShapeSample shape;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto toks = split_ws(line);
    if (toks.size() < 3) throw ParseError(i + 1, "expected 3 values, got " + std::to_string(toks.size()));
    shape.vertices.push_back({parse_coord(toks[0], i + 1), parse_coord(toks[1], i + 1), parse_coord(toks[2], i + 1)});
  }
  if (shape.vertices.empty()) throw ParseError(1, "no points");
  return shape;
}

ShapeSample load_shape(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const std::string text = read_file_text(path);
  ShapeSample shape;
  try {
    if (ext == ".off") {
      shape = parse_off(text);
    } else if (ext == ".xyz" || ext == ".pts" || ext == ".txt") {
      shape = parse_xyz(text);
    } else {
      throw Error("unsupported shape format '" + ext + "'");
    }
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
  shape.id = path;
  return shape;
}

void GridFrame::validate() const {
  if (resolution < 8) throw ConfigError("resolution must be >= 8, got " + std::to_string(resolution));
  if (!(margin >= 0.0) || !(margin < resolution / 4.0)) {
    throw ConfigError("margin must lie in [0, R/4), got " + format_double(margin));
  }
}

std::array<Vec3, 2> bounding_box(const ShapeSample& shape) {
  Vec3 lo = shape.vertices.front();
  Vec3 hi = lo;
  for (const auto& v : shape.vertices) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  }
  return {lo, hi};
}

ShapeSample normalize(const ShapeSample& shape, const GridFrame& frame) {
  frame.validate();
  shape.validate();
  const auto [lo, hi] = bounding_box(shape);
  const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  if (!(extent > 0.0)) throw DegenerateError("shape '" + shape.id + "' has zero extent");

  const double scale = frame.object_size() / extent;
  Vec3 mid;
  for (int a = 0; a < 3; ++a) mid[a] = 0.5 * (lo[a] + hi[a]);

  // Re-normalizing must be the identity; rounding in the affine map would
  // otherwise perturb the last bits.
  const double tol = 1e-12 * frame.resolution;
  const bool already = std::abs(scale - 1.0) <= 1e-12 && std::abs(mid[0] - frame.center()) <= tol &&
                       std::abs(mid[1] - frame.center()) <= tol && std::abs(mid[2] - frame.center()) <= tol;
  if (already) return shape;

  ShapeSample out = shape;
  for (auto& v : out.vertices) {
    for (int a = 0; a < 3; ++a) v[a] = (v[a] - mid[a]) * scale + frame.center();
  }
  return out;
}

}  // namespace fpnn::ingest
