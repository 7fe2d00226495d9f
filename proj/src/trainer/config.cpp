#include "fpnn/trainer/config.hpp"

#include <filesystem>
#include <functional>
#include <vector>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::trainer {

namespace {

namespace fs = std::filesystem;

struct Key {
  const char* name;
  bool echoed;
  std::function<void(TrainConfig&, std::string_view, const std::string& base_dir)> set;
  std::function<std::string(const TrainConfig&)> get;
};

double to_double(std::string_view v) {
  auto d = parse_double(v);
  if (!d) throw ConfigError("expected a number, got '" + std::string(v) + "'");
  return *d;
}

long long to_int(std::string_view v, long long lo) {
  auto i = parse_int(v);
  if (!i) throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  if (*i < lo) throw ConfigError("value " + std::to_string(*i) + " below minimum " + std::to_string(lo));
  return *i;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

std::string resolve(std::string_view v, const std::string& base_dir) {
  if (v.empty()) return {};
  fs::path p{std::string(v)};
  if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

std::string fmt(double v) { return format_double(v); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

#define FPNN_INT_KEY(key, echoed, member, lo)                                                              \
  Key {                                                                                                    \
    key, echoed, [](TrainConfig& c, std::string_view v, const std::string&) {                             \
      c.member = static_cast<decltype(c.member)>(to_int(v, lo));                                          \
    },                                                                                                     \
        [](const TrainConfig& c) { return std::to_string(c.member); }                                      \
  }
#define FPNN_REAL_KEY(key, echoed, member)                                                                 \
  Key {                                                                                                    \
    key, echoed, [](TrainConfig& c, std::string_view v, const std::string&) { c.member = to_double(v); }, \
        [](const TrainConfig& c) { return fmt(c.member); }                                                 \
  }
#define FPNN_BOOL_KEY(key, echoed, member)                                                                 \
  Key {                                                                                                    \
    key, echoed, [](TrainConfig& c, std::string_view v, const std::string&) { c.member = to_bool(v); },   \
        [](const TrainConfig& c) { return fmt_bool(c.member); }                                            \
  }
#define FPNN_PATH_KEY(key, member)                                                                         \
  Key {                                                                                                    \
    key, false, [](TrainConfig& c, std::string_view v, const std::string& b) { c.member = resolve(v, b); }, \
        [](const TrainConfig& c) { return c.member; }                                                      \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"architecture", true,
          [](TrainConfig& c, std::string_view v, const std::string&) {
            c.architecture = nn::parse_architecture(std::string(v));
          },
          [](const TrainConfig& c) { return nn::to_string(c.architecture); }},
      FPNN_INT_KEY("resolution", true, resolution, 1),
      FPNN_REAL_KEY("margin", true, margin),
      Key{"channels", true,
          [](TrainConfig& c, std::string_view v, const std::string&) {
            if (v == "distance") {
              c.normals = false;
            } else if (v == "distance+normals") {
              c.normals = true;
            } else {
              throw ConfigError("channels must be 'distance' or 'distance+normals', got '" + std::string(v) + "'");
            }
          },
          [](const TrainConfig& c) { return std::string(c.normals ? "distance+normals" : "distance"); }},
      FPNN_INT_KEY("grid", true, init.grid, 1),
      FPNN_INT_KEY("filters_per_cell", true, init.filters_per_cell, 1),
      FPNN_INT_KEY("points_per_filter", true, init.points_per_filter, 1),
      FPNN_REAL_KEY("length_low", true, init.length_low),
      FPNN_REAL_KEY("length_high", true, init.length_high),
      FPNN_INT_KEY("init_seed", true, init.seed, 0),
      Key{"sigma", true,
          [](TrainConfig& c, std::string_view v, const std::string&) { c.sigma = to_double(v); },
          [](const TrainConfig& c) { return fmt(c.effective_sigma()); }},
      FPNN_INT_KEY("hidden_width", true, hidden_width, 1),
      FPNN_REAL_KEY("dropout", true, dropout),
      FPNN_REAL_KEY("bn_momentum", true, bn_momentum),
      FPNN_REAL_KEY("bn_epsilon", true, bn_epsilon),
      FPNN_INT_KEY("num_classes", true, num_classes, 0),
      FPNN_REAL_KEY("samples_per_area", true, samples_per_area),
      Key{"augment", true,
          [](TrainConfig& c, std::string_view v, const std::string&) { c.augment = ingest::PerturbMode::parse(v); },
          [](const TrainConfig& c) { return c.augment.to_string(); }},
      Key{"eval_perturb", false,
          [](TrainConfig& c, std::string_view v, const std::string&) {
            c.eval_perturb = ingest::PerturbMode::parse(v);
          },
          [](const TrainConfig& c) { return c.eval_perturb.to_string(); }},
      FPNN_REAL_KEY("learning_rate", true, sgd.learning_rate),
      FPNN_REAL_KEY("momentum", true, sgd.momentum),
      FPNN_REAL_KEY("weight_decay", true, sgd.weight_decay),
      FPNN_INT_KEY("batch_size", true, sgd.batch_size, 1),
      FPNN_INT_KEY("max_iterations", false, sgd.max_iterations, 0),
      FPNN_INT_KEY("seed", true, sgd.seed, 0),
      FPNN_BOOL_KEY("freeze_probing", true, freeze_probing),
      FPNN_BOOL_KEY("freeze_head", true, freeze_head),
      FPNN_PATH_KEY("train_manifest", train_manifest),
      FPNN_PATH_KEY("test_manifest", test_manifest),
      FPNN_PATH_KEY("out_dir", out_dir),
      FPNN_INT_KEY("checkpoint_every", false, checkpoint_every, 0),
      FPNN_INT_KEY("eval_every", false, eval_every, 0),
      FPNN_INT_KEY("workers", false, workers, 1),
      FPNN_PATH_KEY("field_cache_dir", field_cache_dir),
      FPNN_INT_KEY("eval_seed", false, eval_seed, 0),
  };
  return table;
}

#undef FPNN_INT_KEY
#undef FPNN_REAL_KEY
#undef FPNN_BOOL_KEY
#undef FPNN_PATH_KEY

std::string render(const TrainConfig& cfg, bool echo_only) {
  std::string out;
  for (const auto& k : keys()) {
    if (echo_only && !k.echoed) continue;
    out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace

TrainConfig TrainConfig::desk_preset() { return TrainConfig{}; }

TrainConfig TrainConfig::full_preset() {
  TrainConfig c;
  c.resolution = 64;
  c.normals = true;
  c.init.filters_per_cell = 16;
  c.sgd.batch_size = 1024;
  c.sgd.max_iterations = 80000;
  return c;
}

void TrainConfig::validate() const {
  frame().validate();
  init.validate();
  sgd.validate();
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0 (0 selects the default)");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(samples_per_area > 0.0)) throw ConfigError("samples_per_area must be > 0");
  if (num_classes == 1) throw ConfigError("num_classes must be 0 (infer) or >= 2");
  if (freeze_probing && freeze_head) throw ConfigError("freeze_probing and freeze_head together leave nothing to train");
  if (sgd.batch_size < 2) throw ConfigError("batch_size must be >= 2 for batch normalization");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

std::string TrainConfig::echo() const { return render(*this, true); }
std::string TrainConfig::to_text() const { return render(*this, false); }

TrainConfig parse_config(std::string_view text, const std::string& base_dir, const TrainConfig& base) {
  TrainConfig cfg = base;
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
    const Key* match = nullptr;
    for (const auto& k : keys()) {
      if (key == k.name) match = &k;
    }
    if (!match) throw ParseError(i + 1, "unknown key '" + key + "'");
    try {
      match->set(cfg, value, base_dir);
    } catch (const ConfigError& e) {
      throw ParseError(i + 1, key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  const std::string dir = fs::path(path).parent_path().string();
  TrainConfig cfg;
  try {
    cfg = parse_config(read_file_text(path), dir);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
  for (const auto* p : {&cfg.train_manifest, &cfg.test_manifest}) {
    if (!p->empty() && !fs::exists(*p)) throw ConfigError(path + ": manifest not found: " + *p);
  }
  return cfg;
}

}  // namespace fpnn::trainer
