#include "fpnn/trainer/checkpoint.hpp"

#include <sstream>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"

namespace fpnn::trainer {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'C', 'K'};
constexpr std::string_view kConfigPrefix = "config:";
constexpr std::uint32_t kMaxRank = 3;
constexpr std::uint32_t kMaxNameLength = 1u << 20;

}  // namespace

const TensorBlock* Checkpoint::find(const std::string& name) const noexcept {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.text(std::string_view(kMagic, 4));
  w.u32(Checkpoint::kVersion);
  w.u64(ckpt.iteration);
  w.u32(static_cast<std::uint32_t>(ckpt.blocks.size() + 1));

  const std::string config_name = std::string(kConfigPrefix) + ckpt.config_echo;
  w.u32(static_cast<std::uint32_t>(config_name.size()));
  w.text(config_name);
  w.u32(1);
  w.u32(0);

  for (const auto& b : ckpt.blocks) {
    w.u32(static_cast<std::uint32_t>(b.name.size()));
    w.text(b.name);
    w.u32(static_cast<std::uint32_t>(b.dims.size()));
    for (auto d : b.dims) w.u32(d);
    w.f32s(b.values);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.rng_state.size()));
  w.text(ckpt.rng_state);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::string magic = r.text(4, "checkpoint magic");
  if (magic != std::string_view(kMagic, 4)) {
    throw FormatError("bad checkpoint magic '" + magic + "', expected 'FPCK'");
  }
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.iteration = r.u64();
  const std::uint32_t count = r.u32();
  bool have_config = false;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    if (name_len > kMaxNameLength) throw FormatError("implausible block name length " + std::to_string(name_len));
    TensorBlock b;
    b.name = r.text(name_len, "block name");
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > kMaxRank) {
      throw FormatError("block '" + b.name.substr(0, 64) + "' has invalid rank " + std::to_string(rank));
    }
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      b.dims.push_back(r.u32());
      n *= b.dims.back();
    }
    r.need(static_cast<std::size_t>(n * sizeof(float)), "block '" + b.name + "'");
    b.values.resize(static_cast<std::size_t>(n));
    r.f32s(b.values, "block '" + b.name + "'");
    if (b.name.starts_with(kConfigPrefix)) {
      if (have_config || n != 0) throw FormatError("malformed config block");
      ckpt.config_echo = b.name.substr(kConfigPrefix.size());
      have_config = true;
      continue;
    }
    ckpt.blocks.push_back(std::move(b));
  }
  if (!have_config) throw FormatError("checkpoint has no config block");
  const std::uint32_t rng_len = r.u32();
  ckpt.rng_state = r.text(rng_len, "rng state");
  if (r.remaining() != 0) throw FormatError(std::to_string(r.remaining()) + " trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string rng_to_text(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_text(const std::string& text) {
  Rng rng;
  std::istringstream is(text);
  is >> rng;
  if (!is) throw FormatError("malformed rng state");
  return rng;
}

Checkpoint capture(Model<float>& model, const nn::Sgd<float>& sgd, std::uint64_t iteration, const Rng& rng,
                   const std::string& config_echo) {
  Checkpoint ckpt;
  ckpt.iteration = iteration;
  ckpt.config_echo = config_echo;
  for (const auto& p : model.parameters()) {
    TensorBlock b;
    b.name = p.name;
    for (auto d : p.tensor->shape()) b.dims.push_back(static_cast<std::uint32_t>(d));
    b.values.assign(p.tensor->values().begin(), p.tensor->values().end());
    ckpt.blocks.push_back(std::move(b));
  }
  for (const auto& [name, v] : sgd.velocities()) {
    ckpt.blocks.push_back({"velocity/" + name, {static_cast<std::uint32_t>(v.size())}, v});
  }
  ckpt.rng_state = rng_to_text(rng);
  return ckpt;
}

void restore(const Checkpoint& ckpt, Model<float>& model, nn::Sgd<float>* sgd) {
  for (auto& p : model.parameters()) {
    const TensorBlock* b = ckpt.find(p.name);
    if (!b) throw FormatError("checkpoint lacks block '" + p.name + "'");
    std::vector<std::uint32_t> dims;
    for (auto d : p.tensor->shape()) dims.push_back(static_cast<std::uint32_t>(d));
    if (dims != b->dims) throw FormatError("block '" + p.name + "' has the wrong shape for this model");
    std::copy(b->values.begin(), b->values.end(), p.tensor->values().begin());
  }
  if (sgd) {
    sgd->velocities().clear();
    for (const auto& b : ckpt.blocks) {
      if (b.name.starts_with("velocity/")) sgd->velocities()[b.name.substr(9)] = b.values;
    }
  }
}

TrainConfig config_from_checkpoint(const Checkpoint& ckpt) { return parse_config(ckpt.config_echo); }

Model<float> model_from_checkpoint(const Checkpoint& ckpt) {
  const TrainConfig cfg = config_from_checkpoint(ckpt);
  if (cfg.num_classes < 2) throw FormatError("checkpoint config does not record the class count");
  auto model = Model<float>::from_config(cfg, static_cast<std::size_t>(cfg.num_classes));
  restore(ckpt, model);
  return model;
}

}  // namespace fpnn::trainer
