#include "fpnn/trainer/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/common/parallel.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::trainer {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kEvalBatch = 64;

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

/// Probing outputs for a batch of shapes; caches are filled when given.
std::vector<std::vector<float>> probe_batch(Model<float>& model, FieldSource& fields,
                                            const std::vector<const ingest::ShapeSample*>& shapes,
                                            ingest::PerturbMode mode, const std::vector<std::uint64_t>& seeds,
                                            std::size_t workers,
                                            std::vector<probing::ProbingCache<float>>* caches = nullptr) {
  std::vector<std::vector<float>> rows(shapes.size());
  if (caches) caches->assign(shapes.size(), {});
  parallel_for(shapes.size(), workers, [&](std::size_t i) {
    const auto f = fields.get(*shapes[i], mode, seeds[i]);
    const field::FieldSampler<float> sampler(*f);
    probing::ProbingCache<float> local;
    rows[i] = model.probe(sampler, caches ? (*caches)[i] : local);
  });
  return rows;
}

bool parameters_finite(Model<float>& model) {
  for (const auto& p : model.parameters()) {
    if (!p.tensor->all_finite()) return false;
  }
  return true;
}

std::size_t resolve_classes(TrainConfig& cfg, const Dataset& train_set, const Dataset* test_set) {
  int inferred = train_set.classes();
  if (test_set) inferred = std::max(inferred, test_set->classes());
  if (cfg.num_classes == 0) cfg.num_classes = inferred;
  if (inferred > cfg.num_classes) {
    throw ConfigError("manifest labels reach " + std::to_string(inferred - 1) + " but num_classes is " +
                      std::to_string(cfg.num_classes));
  }
  if (cfg.num_classes < 2) throw ConfigError("training needs at least 2 classes");
  return static_cast<std::size_t>(cfg.num_classes);
}

}  // namespace

std::string format_metrics(const std::vector<MetricRow>& rows) {
  std::string out = "iteration,loss,train_acc,eval_acc,wall_ms\n";
  char line[160];
  for (const auto& r : rows) {
    std::string eval = r.eval_acc ? format_double(*r.eval_acc) : std::string();
    std::snprintf(line, sizeof line, "%llu,%.9g,%.6g,%s,%.3f\n", static_cast<unsigned long long>(r.iteration), r.loss,
                  r.train_acc, eval.c_str(), r.wall_ms);
    out += line;
  }
  return out;
}

EvalResult evaluate(Model<float>& model, const Dataset& data, FieldSource& fields, ingest::PerturbMode perturb,
                    std::uint64_t seed, std::size_t workers) {
  const std::size_t k = model.classes();
  EvalResult r;
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const std::size_t end = std::min(data.size(), start + kEvalBatch);
    std::vector<const ingest::ShapeSample*> shapes;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = start; i < end; ++i) {
      const auto& s = data.shapes[i];
      if (s.label < 0 || static_cast<std::size_t>(s.label) >= k) {
        throw ConfigError("label " + std::to_string(s.label) + " of '" + s.id + "' exceeds the model's " +
                          std::to_string(k) + " classes");
      }
      shapes.push_back(&s);
      seeds.push_back(derive_seed(seed, {hash_string(s.id), i}));
    }
    const auto logits = model.logits(stack_rows(probe_batch(model, fields, shapes, perturb, seeds, workers)));
    for (std::size_t b = 0; b < shapes.size(); ++b) {
      const std::size_t pred = nn::argmax(std::span<const float>(logits.data() + b * k, k));
      const auto truth = static_cast<std::size_t>(shapes[b]->label);
      ++r.confusion[truth][pred];
      correct += pred == truth;
    }
  }
  r.total = data.size();
  r.accuracy = r.total ? static_cast<double>(correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

EvalResult evaluate(const Checkpoint& ckpt, const std::string& manifest, std::optional<ingest::PerturbMode> perturb,
                    std::uint64_t seed, std::size_t workers) {
  TrainConfig cfg = config_from_checkpoint(ckpt);
  auto model = model_from_checkpoint(ckpt);
  const Dataset data = load_dataset(manifest, cfg.frame());
  cfg.field_cache_dir.clear();
  FieldSource fields(cfg);
  return evaluate(model, data, fields, perturb.value_or(ingest::PerturbMode{}), seed, workers);
}

TrainResult train(TrainConfig cfg, const TrainOptions& options) {
  cfg.validate();
  if (cfg.train_manifest.empty()) throw ConfigError("train_manifest is not set");
  const Dataset train_set = load_dataset(cfg.train_manifest, cfg.frame());
  std::optional<Dataset> test_set;
  if (!cfg.test_manifest.empty()) test_set = load_dataset(cfg.test_manifest, cfg.frame());
  const std::size_t classes = resolve_classes(cfg, train_set, test_set ? &*test_set : nullptr);
  const std::string echo = cfg.echo();

  auto model = Model<float>::from_config(cfg, classes);
  if (options.init_hook) options.init_hook(model);
  nn::Sgd<float> sgd(cfg.sgd);
  Rng rng(derive_seed(cfg.sgd.seed, {0x64617461}));
  std::uint64_t iteration = 0;

  if (!options.resume.empty()) {
    const Checkpoint ckpt = load_checkpoint(options.resume);
    if (ckpt.config_echo != echo) {
      throw ConfigError("resume checkpoint was trained with a different configuration:\n" + ckpt.config_echo +
                        "--- current ---\n" + echo);
    }
    restore(ckpt, model, &sgd);
    rng = rng_from_text(ckpt.rng_state);
    iteration = ckpt.iteration;
  }
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

  FieldSource fields(cfg);
  TrainResult result;
  const std::size_t batch = cfg.sgd.batch_size;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<probing::ProbingCache<float>> caches;

  const auto run_eval = [&]() -> std::optional<EvalResult> {
    if (!test_set) return std::nullopt;
    return evaluate(model, *test_set, fields, cfg.eval_perturb, cfg.eval_seed, cfg.workers);
  };

  while (iteration < cfg.sgd.max_iterations) {
    std::vector<const ingest::ShapeSample*> shapes(batch);
    std::vector<std::uint64_t> seeds(batch);
    std::vector<int> labels(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto idx = static_cast<std::size_t>(uniform_index(rng, train_set.size()));
      shapes[b] = &train_set.shapes[idx];
      seeds[b] = rng();
      labels[b] = shapes[b]->label;
    }
    const auto rows = probe_batch(model, fields, shapes, cfg.augment, seeds, cfg.workers, &caches);
    const auto step = model.train_batch(stack_rows(rows), caches, labels,
                                        derive_seed(cfg.sgd.seed, {iteration, 0x64726f70}), cfg.freeze_probing);
    if (!std::isfinite(step.loss) || !parameters_finite(model)) {
      if (!cfg.out_dir.empty()) {
        save_checkpoint(capture(model, sgd, iteration, rng, echo), join(cfg.out_dir, "diagnostic.ckpt"));
      }
      throw NumericError("non-finite loss or gradient at iteration " + std::to_string(iteration));
    }
    sgd.step(model.parameters(cfg.freeze_probing, cfg.freeze_head));
    model.bank().clamp_locations();
    model.zero_grad();
    ++iteration;

    MetricRow row;
    row.iteration = iteration;
    row.loss = step.loss;
    row.train_acc = static_cast<double>(step.correct) / static_cast<double>(batch);
    if (cfg.eval_every && iteration % cfg.eval_every == 0 && iteration < cfg.sgd.max_iterations) {
      if (auto e = run_eval()) row.eval_acc = e->accuracy;
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(row);
    if (options.on_iteration) options.on_iteration(row);

    if (cfg.checkpoint_every && iteration % cfg.checkpoint_every == 0 && !cfg.out_dir.empty()) {
      save_checkpoint(capture(model, sgd, iteration, rng, echo),
                      join(cfg.out_dir, "iter_" + std::to_string(iteration) + ".ckpt"));
    }
  }

  result.test = run_eval();
  if (result.test && !result.metrics.empty()) result.metrics.back().eval_acc = result.test->accuracy;
  result.checkpoint = capture(model, sgd, iteration, rng, echo);
  if (!cfg.out_dir.empty()) {
    save_checkpoint(result.checkpoint, join(cfg.out_dir, "final.ckpt"));
    write_file_text(join(cfg.out_dir, "metrics.csv"), format_metrics(result.metrics));
  }
  return result;
}

FeatureTable extract_features(const Checkpoint& ckpt, const std::string& manifest, std::optional<std::size_t> tap,
                              std::size_t workers) {
  TrainConfig cfg = config_from_checkpoint(ckpt);
  auto model = model_from_checkpoint(ckpt);
  const Dataset data = load_dataset(manifest, cfg.frame());
  cfg.field_cache_dir.clear();
  FieldSource fields(cfg);
  const std::size_t layer = tap.value_or(model.default_tap());

  FeatureTable table;
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const std::size_t end = std::min(data.size(), start + kEvalBatch);
    std::vector<const ingest::ShapeSample*> shapes;
    for (std::size_t i = start; i < end; ++i) shapes.push_back(&data.shapes[i]);
    const std::vector<std::uint64_t> seeds(shapes.size(), 0);
    const auto out = model.tap(stack_rows(probe_batch(model, fields, shapes, {}, seeds, workers)), layer);
    const std::size_t width = out.dim(1);
    for (std::size_t b = 0; b < shapes.size(); ++b) {
      table.ids.push_back(shapes[b]->id);
      table.labels.push_back(shapes[b]->label);
      table.rows.emplace_back(out.data() + b * width, out.data() + (b + 1) * width);
    }
  }
  return table;
}

std::string format_features(const FeatureTable& table) {
  std::string out = "id,label";
  const std::size_t width = table.rows.empty() ? 0 : table.rows.front().size();
  for (std::size_t j = 0; j < width; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::string id = table.ids[i];
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    out += id + "," + std::to_string(table.labels[i]);
    for (float v : table.rows[i]) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

TrainResult fine_tune(const Checkpoint& donor, TrainConfig cfg, const TrainOptions& options) {
  cfg.validate();
  const TrainConfig donor_cfg = config_from_checkpoint(donor);
  if (donor_cfg.resolution != cfg.resolution || donor_cfg.normals != cfg.normals ||
      donor_cfg.filters() != cfg.filters() || donor_cfg.init.points_per_filter != cfg.init.points_per_filter) {
    throw ConfigError("fine-tune config must keep the donor's resolution, channels, filter count and points per filter");
  }
  TrainOptions opts = options;
  opts.init_hook = [&donor, user_hook = options.init_hook](Model<float>& model) {
    const std::string final_prefix = "head." + std::to_string(model.head().size() - 1) + ".";
    for (auto& p : model.parameters()) {
      if (p.name.starts_with(final_prefix)) continue;
      const TensorBlock* b = donor.find(p.name);
      if (!b) continue;
      std::vector<std::uint32_t> dims;
      for (auto d : p.tensor->shape()) dims.push_back(static_cast<std::uint32_t>(d));
      if (dims != b->dims) continue;
      std::copy(b->values.begin(), b->values.end(), p.tensor->values().begin());
    }
    if (user_hook) user_hook(model);
  };
  return train(std::move(cfg), opts);
}

}  // namespace fpnn::trainer
