#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "fpnn/ingest/perturbation.hpp"
#include "fpnn/ingest/shape.hpp"
#include "fpnn/nn/net_spec.hpp"
#include "fpnn/nn/sgd.hpp"
#include "fpnn/probing/filter_bank.hpp"

namespace fpnn::trainer {

/// Every hyperparameter of a run. Text form is flat "key = value" lines;
/// '#' starts a comment and unknown keys are errors.
struct TrainConfig {
  nn::Architecture architecture = nn::Architecture::one_fc;
  int resolution = 32;
  double margin = 2.0;
  bool normals = false;  // channels: distance (T=1) or distance+normals (T=4)
  probing::InitConfig init{4, 1, 8, 0.2, 0.8, 1};
  double sigma = 0.0;  // 0 selects 0.1 * object size
  std::size_t hidden_width = 1024;
  double dropout = 0.5;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;
  int num_classes = 0;  // 0 infers from the manifests
  double samples_per_area = 8.0;
  ingest::PerturbMode augment{ingest::PerturbMode::kRotateUp};
  ingest::PerturbMode eval_perturb{};
  nn::SgdConfig sgd{};
  bool freeze_probing = false;
  bool freeze_head = false;

  std::string train_manifest;
  std::string test_manifest;
  std::string out_dir;
  std::size_t checkpoint_every = 0;  // 0 disables intermediate checkpoints
  std::size_t eval_every = 0;        // 0 evaluates only at the end
  std::size_t workers = 1;
  std::string field_cache_dir;       // empty keeps unaugmented fields in memory only
  std::uint64_t eval_seed = 7;

  /// R=32, C=64 (G=4, P=1), N=8, T=1, batch 32, 2000 iterations, augment R.
  static TrainConfig desk_preset();
  /// R=64, C=1024 (G=4, P=16), N=8, T=4, batch 1024, 80000 iterations.
  static TrainConfig full_preset();

  std::size_t channels() const noexcept { return normals ? 4 : 1; }
  std::size_t filters() const noexcept { return init.filter_count(); }
  ingest::GridFrame frame() const noexcept { return {resolution, margin}; }
  double effective_sigma() const noexcept { return sigma > 0.0 ? sigma : 0.1 * frame().object_size(); }
  nn::HeadOptions head_options() const noexcept { return {hidden_width, dropout, bn_momentum, bn_epsilon}; }

  /// Cross-field checks; throws ConfigError.
  void validate() const;

  /// Keys that determine the model and the optimization trajectory, with
  /// sigma resolved. Paths, iteration budget, cadences and worker count are
  /// left out so a run can be resumed or re-targeted.
  std::string echo() const;
  /// All keys, suitable for writing back to a config file.
  std::string to_text() const;
};

/// Applies "key = value" lines on top of `base`. Relative paths resolve
/// against `base_dir`. Throws ParseError (with line) for malformed lines,
/// unknown keys and bad values.
TrainConfig parse_config(std::string_view text, const std::string& base_dir = "",
                         const TrainConfig& base = TrainConfig::desk_preset());

/// Reads a config file and checks that referenced manifests exist.
TrainConfig load_config(const std::string& path);

}  // namespace fpnn::trainer
