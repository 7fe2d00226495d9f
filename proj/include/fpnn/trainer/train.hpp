#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpnn/trainer/checkpoint.hpp"
#include "fpnn/trainer/config.hpp"
#include "fpnn/trainer/dataset.hpp"
#include "fpnn/trainer/model.hpp"

namespace fpnn::trainer {

struct MetricRow {
  std::uint64_t iteration = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  std::optional<double> eval_acc;
  double wall_ms = 0.0;
};

/// "iteration,loss,train_acc,eval_acc,wall_ms"; eval_acc is empty when not measured.
std::string format_metrics(const std::vector<MetricRow>& rows);

struct EvalResult {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

struct TrainOptions {
  std::string resume;  // checkpoint to continue from
  /// Runs after the model is built and before training starts.
  std::function<void(Model<float>&)> init_hook;
  /// Called after every iteration.
  std::function<void(const MetricRow&)> on_iteration;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricRow> metrics;
  std::optional<EvalResult> test;
};

/// Minibatch SGD over the train manifest with on-the-fly augmentation.
/// Writes checkpoints and metrics.csv under out_dir when it is set. A
/// non-finite loss saves out_dir/diagnostic.ckpt and throws NumericError.
TrainResult train(TrainConfig cfg, const TrainOptions& options = {});

/// Single-view top-1 accuracy in eval mode. Each sample's perturbation is
/// seeded from (seed, sample id, index), so repeated calls agree.
EvalResult evaluate(Model<float>& model, const Dataset& data, FieldSource& fields, ingest::PerturbMode perturb,
                    std::uint64_t seed, std::size_t workers = 1);

/// Loads `manifest` with the checkpoint's frame. `perturb` defaults to none.
EvalResult evaluate(const Checkpoint& ckpt, const std::string& manifest,
                    std::optional<ingest::PerturbMode> perturb = std::nullopt, std::uint64_t seed = 7,
                    std::size_t workers = 1);

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::vector<float>> rows;
};

/// Eval-mode activations at head layer `tap` (default: the input of the
/// final FC layer); unperturbed fields.
FeatureTable extract_features(const Checkpoint& ckpt, const std::string& manifest,
                              std::optional<std::size_t> tap = std::nullopt, std::size_t workers = 1);

/// "id,label,f0,...,f{D-1}"
std::string format_features(const FeatureTable& table);

/// Starts from the donor's probing filters and every head block whose name
/// and shape match, except the final FC, which is freshly initialized for
/// cfg's class count. The probing configuration must match the donor's.
TrainResult fine_tune(const Checkpoint& donor, TrainConfig cfg, const TrainOptions& options = {});

}  // namespace fpnn::trainer
