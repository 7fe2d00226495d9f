#include "fpnn/trainer/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"
#include "fpnn/ingest/manifest.hpp"

namespace fpnn::trainer {

namespace {

namespace fs = std::filesystem;
using ingest::Face;
using ingest::ShapeSample;
using ingest::Vec3;

constexpr double kPi = std::numbers::pi;

struct MeshBuilder {
  ShapeSample s;

  std::uint32_t vertex(double x, double y, double z) {
    s.vertices.push_back({x, y, z});
    return static_cast<std::uint32_t>(s.vertices.size() - 1);
  }
  void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) { s.faces.push_back({a, b, c}); }
  void quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    tri(a, b, c);
    tri(a, c, d);
  }
};

double jittered(Rng& rng, double base, double jitter) { return base * uniform(rng, 1.0 - jitter, 1.0 + jitter); }

/// Ring of `n` vertices at height z.
std::vector<std::uint32_t> ring(MeshBuilder& m, int n, double radius, double z) {
  std::vector<std::uint32_t> idx;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * i / n;
    idx.push_back(m.vertex(radius * std::cos(a), radius * std::sin(a), z));
  }
  return idx;
}

void connect(MeshBuilder& m, const std::vector<std::uint32_t>& lo, const std::vector<std::uint32_t>& hi) {
  const std::size_t n = lo.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    m.quad(lo[i], lo[j], hi[j], hi[i]);
  }
}

void cap(MeshBuilder& m, const std::vector<std::uint32_t>& r, double z, bool up) {
  const auto c = m.vertex(0, 0, z);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const std::size_t j = (i + 1) % r.size();
    if (up) {
      m.tri(c, r[i], r[j]);
    } else {
      m.tri(c, r[j], r[i]);
    }
  }
}

ShapeSample sphere(int seg) {
  MeshBuilder m;
  const int rings = seg / 2;
  const auto south = m.vertex(0, 0, -1);
  std::vector<std::vector<std::uint32_t>> lat;
  for (int k = 1; k < rings; ++k) {
    const double phi = -kPi / 2 + kPi * k / rings;
    lat.push_back(ring(m, seg, std::cos(phi), std::sin(phi)));
  }
  const auto north = m.vertex(0, 0, 1);
  for (int i = 0; i < seg; ++i) {
    const int j = (i + 1) % seg;
    m.tri(south, lat.front()[j], lat.front()[i]);
    m.tri(north, lat.back()[i], lat.back()[j]);
  }
  for (std::size_t k = 0; k + 1 < lat.size(); ++k) connect(m, lat[k], lat[k + 1]);
  return m.s;
}

ShapeSample box(double a, double b, double c) {
  MeshBuilder m;
  std::uint32_t v[8];
  for (int i = 0; i < 8; ++i) v[i] = m.vertex((i & 1 ? a : -a) / 2, (i & 2 ? b : -b) / 2, (i & 4 ? c : -c) / 2);
  m.quad(v[0], v[2], v[3], v[1]);
  m.quad(v[4], v[5], v[7], v[6]);
  m.quad(v[0], v[1], v[5], v[4]);
  m.quad(v[2], v[6], v[7], v[3]);
  m.quad(v[0], v[4], v[6], v[2]);
  m.quad(v[1], v[3], v[7], v[5]);
  return m.s;
}

ShapeSample cylinder(int seg, double radius, double height) {
  MeshBuilder m;
  const auto lo = ring(m, seg, radius, -height / 2);
  const auto hi = ring(m, seg, radius, height / 2);
  connect(m, lo, hi);
  cap(m, lo, -height / 2, false);
  cap(m, hi, height / 2, true);
  return m.s;
}

ShapeSample torus(int seg, double major, double minor) {
  MeshBuilder m;
  const int tube = std::max(8, seg / 2);
  std::vector<std::vector<std::uint32_t>> rings;
  for (int i = 0; i < seg; ++i) {
    const double a = 2.0 * kPi * i / seg;
    std::vector<std::uint32_t> r;
    for (int k = 0; k < tube; ++k) {
      const double b = 2.0 * kPi * k / tube;
      const double rho = major + minor * std::cos(b);
      r.push_back(m.vertex(rho * std::cos(a), rho * std::sin(a), minor * std::sin(b)));
    }
    rings.push_back(std::move(r));
  }
  for (int i = 0; i < seg; ++i) connect(m, rings[i], rings[(i + 1) % seg]);
  return m.s;
}

ShapeSample cone(int seg, double radius, double height) {
  MeshBuilder m;
  const auto base = ring(m, seg, radius, -height / 2);
  const auto apex = m.vertex(0, 0, height / 2);
  for (int i = 0; i < seg; ++i) m.tri(base[i], base[(i + 1) % seg], apex);
  cap(m, base, -height / 2, false);
  return m.s;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  for (auto part : split(v, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

std::string to_string(Primitive p) {
  switch (p) {
    case Primitive::sphere:
      return "sphere";
    case Primitive::box:
      return "box";
    case Primitive::cylinder:
      return "cylinder";
    case Primitive::torus:
      return "torus";
    case Primitive::cone:
      return "cone";
  }
  return "?";
}

Primitive parse_primitive(std::string_view name) {
  for (auto p : {Primitive::sphere, Primitive::box, Primitive::cylinder, Primitive::torus, Primitive::cone}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("unknown primitive '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  if (classes.size() < 2) throw ConfigError("synthetic spec needs at least 2 classes");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      if (classes[i] == classes[j]) throw ConfigError("duplicate class '" + to_string(classes[i]) + "'");
    }
  }
  if (train_per_class < 1 || test_per_class < 1) throw ConfigError("per-class counts must be >= 1");
  if (resolution < 8) throw ConfigError("resolution must be >= 8");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw ConfigError("jitter must lie in [0, 0.5)");
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec spec;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(i + 1, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto integer = [&](long long lo) {
      auto v = parse_int(value);
      if (!v || *v < lo) throw ParseError(i + 1, key + ": expected an integer >= " + std::to_string(lo));
      return *v;
    };
    try {
      if (key == "classes") {
        spec.classes.clear();
        for (auto name : split_list(value)) spec.classes.push_back(parse_primitive(name));
      } else if (key == "train_per_class") {
        spec.train_per_class = static_cast<std::size_t>(integer(1));
      } else if (key == "test_per_class") {
        spec.test_per_class = static_cast<std::size_t>(integer(1));
      } else if (key == "seed") {
        spec.seed = static_cast<std::uint64_t>(integer(0));
      } else if (key == "resolution") {
        spec.resolution = static_cast<int>(integer(8));
      } else if (key == "jitter") {
        auto v = parse_double(value);
        if (!v) throw ParseError(i + 1, "jitter: expected a number");
        spec.jitter = *v;
      } else {
        throw ParseError(i + 1, "unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ParseError(i + 1, e.what());
    }
  }
  spec.validate();
  return spec;
}

ShapeSample make_primitive(Primitive p, double jitter, int resolution, Rng& rng) {
  const int seg = std::max(16, (resolution + 3) / 4 * 4);
  switch (p) {
    case Primitive::sphere:
      return sphere(seg);
    case Primitive::box:
      return box(jittered(rng, 1.0, jitter), jittered(rng, 0.8, jitter), jittered(rng, 0.6, jitter));
    case Primitive::cylinder:
      return cylinder(seg, jittered(rng, 0.35, jitter), jittered(rng, 1.0, jitter));
    case Primitive::torus:
      return torus(seg, 1.0, jittered(rng, 0.3, jitter));
    case Primitive::cone:
      return cone(seg, jittered(rng, 0.5, jitter), jittered(rng, 1.0, jitter));
  }
  throw ContractError("unknown primitive");
}

SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  spec.validate();
  SyntheticOutput out;
  const std::pair<const char*, std::size_t> splits[] = {{"train", spec.train_per_class},
                                                        {"test", spec.test_per_class}};
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& [split_name, count] = splits[s];
    std::vector<std::pair<std::string, int>> rows;
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      const std::string cls = to_string(spec.classes[c]);
      const fs::path dir = fs::path(out_dir) / "shapes" / cls;
      fs::create_directories(dir);
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(spec.seed, {s, static_cast<std::uint64_t>(spec.classes[c]), i}));
        const auto shape = make_primitive(spec.classes[c], spec.jitter, spec.resolution, rng);
        const std::string name = std::string(split_name) + "_" + std::to_string(i) + ".off";
        write_file_text((dir / name).string(), ingest::write_off(shape));
        rows.emplace_back("shapes/" + cls + "/" + name, static_cast<int>(c));
        ++out.files;
      }
    }
    const std::string manifest = (fs::path(out_dir) / (std::string(split_name) + ".txt")).string();
    write_file_text(manifest, ingest::format_manifest(rows));
    (s == 0 ? out.train_manifest : out.test_manifest) = manifest;
  }
  return out;
}

}  // namespace fpnn::trainer
