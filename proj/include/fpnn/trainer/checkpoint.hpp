#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpnn/common/rng.hpp"
#include "fpnn/nn/sgd.hpp"
#include "fpnn/trainer/model.hpp"

namespace fpnn::trainer {

struct TensorBlock {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  bool operator==(const TensorBlock&) const = default;
};

/// Little-endian "FPCK" | u32 version | u64 iteration | u32 block count |
/// per block: u32 name length, name, u32 rank, u32 dims, float32 values |
/// u32 length + RNG state text. The config echo travels as the first
/// block, named "config:<echo>" with rank 1, dim 0.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t iteration = 0;
  std::string config_echo;
  std::vector<TensorBlock> blocks;  // parameters, buffers, then "velocity/<name>"
  std::string rng_state;

  const TensorBlock* find(const std::string& name) const noexcept;
  bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, unsupported version, truncation or
/// trailing bytes.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string rng_to_text(const Rng& rng);
Rng rng_from_text(const std::string& text);

/// Snapshot of a model, its optimizer velocities and the data RNG.
Checkpoint capture(Model<float>& model, const nn::Sgd<float>& sgd, std::uint64_t iteration, const Rng& rng,
                   const std::string& config_echo);

/// Copies every model block from `ckpt` into `model`; shapes must match.
/// Velocities are restored into `sgd` when given.
void restore(const Checkpoint& ckpt, Model<float>& model, nn::Sgd<float>* sgd = nullptr);

/// Rebuilds the config a checkpoint was trained with from its echo.
TrainConfig config_from_checkpoint(const Checkpoint& ckpt);

/// Model with the checkpoint's architecture and weights.
Model<float> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace fpnn::trainer
