// Command-line front end: voxelize, gen-synthetic, train, eval,
// extract-features, finetune, gradcheck, bench.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpnn/bench/bench.hpp"
#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/field/distance.hpp"
#include "fpnn/field/field_io.hpp"
#include "fpnn/ingest/voxelize.hpp"
#include "fpnn/simd/kernels.hpp"
#include "fpnn/trainer/gradcheck_suite.hpp"
#include "fpnn/trainer/synthetic.hpp"
#include "fpnn/trainer/train.hpp"

namespace {

using namespace fpnn;

void print_eval(const trainer::EvalResult& r) {
  std::printf("accuracy %.4f (%zu samples)\nconfusion (rows: true, cols: predicted)\n", r.accuracy, r.total);
  for (const auto& row : r.confusion) {
    for (std::size_t j = 0; j < row.size(); ++j) std::printf("%s%5zu", j ? " " : "", row[j]);
    std::printf("\n");
  }
}

std::function<void(const trainer::MetricRow&)> progress(std::size_t every, std::uint64_t total) {
  return [every, total](const trainer::MetricRow& m) {
    if (every && (m.iteration % every == 0 || m.iteration == total)) {
      std::fprintf(stderr, "iter %llu/%llu loss %.4f train_acc %.3f%s %.1fs\n",
                   static_cast<unsigned long long>(m.iteration), static_cast<unsigned long long>(total), m.loss,
                   m.train_acc, m.eval_acc ? (" eval_acc " + std::to_string(*m.eval_acc)).c_str() : "",
                   m.wall_ms / 1000.0);
    }
  };
}

std::vector<int> parse_resolutions(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!part.empty()) out.push_back(std::stoi(part));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("no resolutions given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field probing neural networks"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel variant: auto, scalar or avx2");

  // voxelize
  auto* vox = app.add_subcommand("voxelize", "Shape file -> distance field file (FPF1)");
  std::string vox_in, vox_out;
  int vox_res = 32;
  double vox_margin = 2.0, vox_density = ingest::kDefaultSamplesPerArea;
  bool vox_normals = false;
  std::uint64_t vox_seed = 0;
  vox->add_option("--in", vox_in, "OFF or XYZ shape")->required();
  vox->add_option("--res", vox_res, "Grid resolution R");
  vox->add_option("--out", vox_out, "Output field file")->required();
  vox->add_option("--margin", vox_margin, "Margin in voxels");
  vox->add_option("--samples-per-area", vox_density, "Surface samples per voxel-face area");
  vox->add_option("--seed", vox_seed, "Surface sampling seed");
  vox->add_flag("--normals", vox_normals, "Append normal channels (T=4)");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic primitive dataset");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Synthetic spec file (defaults apply when omitted)");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train from a config file");
  std::string tr_config, tr_resume;
  bool tr_freeze = false;
  std::size_t tr_log = 100;
  tr->add_option("--config", tr_config, "Config file")->required();
  tr->add_option("--resume", tr_resume, "Checkpoint to resume from");
  tr->add_flag("--freeze-probing", tr_freeze, "Keep probing filters fixed");
  tr->add_option("--log-every", tr_log, "Progress line cadence (0 = quiet)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  std::string ev_ckpt, ev_manifest, ev_perturb;
  std::uint64_t ev_seed = 7;
  std::size_t ev_workers = 1;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint")->required();
  ev->add_option("--manifest", ev_manifest, "Manifest")->required();
  ev->add_option("--perturb", ev_perturb, "Perturbation protocol, e.g. R15+T01+S");
  ev->add_option("--seed", ev_seed, "Perturbation seed");
  ev->add_option("--workers", ev_workers, "Worker threads");

  // extract-features
  auto* fx = app.add_subcommand("extract-features", "Export per-sample feature vectors as CSV");
  std::string fx_ckpt, fx_manifest, fx_out;
  std::optional<std::size_t> fx_tap;
  fx->add_option("--ckpt", fx_ckpt, "Checkpoint")->required();
  fx->add_option("--manifest", fx_manifest, "Manifest")->required();
  fx->add_option("--out", fx_out, "Output CSV")->required();
  fx->add_option("--tap", fx_tap, "Head layer index (default: input of the final FC)");

  // finetune
  auto* ft = app.add_subcommand("finetune", "Fine-tune a donor checkpoint on a new config");
  std::string ft_ckpt, ft_config;
  std::size_t ft_log = 100;
  ft->add_option("--ckpt", ft_ckpt, "Donor checkpoint")->required();
  ft->add_option("--config", ft_config, "Config for the new task")->required();
  ft->add_option("--log-every", ft_log, "Progress line cadence (0 = quiet)");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference checks of every backward pass");
  std::string gc_layer;
  std::size_t gc_instances = 100;
  std::uint64_t gc_seed = 1;
  gc->add_option("--layer", gc_layer, "Single check to run");
  gc->add_option("--instances", gc_instances, "Random instances per check");
  gc->add_option("--seed", gc_seed, "Seed");

  // bench
  auto* bn = app.add_subcommand("bench", "Probing vs dense convolution timing across resolutions");
  std::string bn_res = "16,32,64", bn_out, bn_scaling = "fixed-stride";
  bench::BenchOptions bn_opts;
  bn->add_option("--resolutions", bn_res, "Comma-separated resolutions");
  bn->add_option("--out", bn_out, "Output CSV (stdout when omitted)");
  bn->add_option("--scaling", bn_scaling, "Conv scaling: fixed-stride or fixed-s");
  bn->add_option("--workers", bn_opts.workers, "Parallel probing workers");
  bn->add_option("--batch", bn_opts.batch, "Samples per probing call");
  bn->add_option("--min-reps", bn_opts.min_reps, "Measured repetitions (at least)");
  bn->add_flag("!--no-conv", bn_opts.run_conv, "Skip the convolution reference");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simd != "auto") {
      const auto isa = simd::parse_isa(simd);
      if (!isa) throw ConfigError("unknown --simd '" + simd + "'");
      simd::set_active_isa(*isa);
    }

    if (*vox) {
      const ingest::GridFrame frame{vox_res, vox_margin};
      frame.validate();
      const auto shape = ingest::normalize(ingest::load_shape(vox_in), frame);
      const auto grid = ingest::voxelize(shape, vox_res, vox_density, vox_seed);
      field::write_field(field::build_input_field(grid, vox_normals), vox_out);
      std::printf("%s: %zu occupied of %d^3 -> %s\n", vox_in.c_str(), grid.count(), vox_res, vox_out.c_str());
    } else if (*gen) {
      const auto spec = gen_spec.empty() ? trainer::SyntheticSpec{}
                                         : trainer::parse_synthetic_spec(read_file_text(gen_spec));
      const auto out = trainer::generate_synthetic(spec, gen_out);
      std::printf("%zu files\n%s\n%s\n", out.files, out.train_manifest.c_str(), out.test_manifest.c_str());
    } else if (*tr) {
      auto cfg = trainer::load_config(tr_config);
      if (tr_freeze) cfg.freeze_probing = true;
      trainer::TrainOptions opts;
      opts.resume = tr_resume;
      opts.on_iteration = progress(tr_log, cfg.sgd.max_iterations);
      const auto r = trainer::train(cfg, opts);
      if (r.test) print_eval(*r.test);
    } else if (*ev) {
      std::optional<ingest::PerturbMode> mode;
      if (!ev_perturb.empty()) mode = ingest::PerturbMode::parse(ev_perturb);
      print_eval(trainer::evaluate(trainer::load_checkpoint(ev_ckpt), ev_manifest, mode, ev_seed, ev_workers));
    } else if (*fx) {
      const auto table = trainer::extract_features(trainer::load_checkpoint(fx_ckpt), fx_manifest, fx_tap);
      write_file_text(fx_out, trainer::format_features(table));
      std::printf("%zu rows x %zu features -> %s\n", table.rows.size(),
                  table.rows.empty() ? 0 : table.rows.front().size(), fx_out.c_str());
    } else if (*ft) {
      const auto cfg = trainer::load_config(ft_config);
      trainer::TrainOptions opts;
      opts.on_iteration = progress(ft_log, cfg.sgd.max_iterations);
      const auto r = trainer::fine_tune(trainer::load_checkpoint(ft_ckpt), cfg, opts);
      if (r.test) print_eval(*r.test);
    } else if (*gc) {
      const std::vector<std::string> names =
          gc_layer.empty() ? trainer::gradcheck_names() : std::vector<std::string>{gc_layer};
      bool ok = true;
      for (const auto& name : names) {
        const auto c = trainer::run_gradcheck(name, gc_instances, gc_seed);
        std::printf("%-11s %s  max_rel_err=%.3e  tol=%.0e  instances=%zu\n", c.name.c_str(),
                    c.passed() ? "PASS" : "FAIL", c.max_rel_error, c.tolerance, c.instances);
        ok = ok && c.passed();
      }
      return ok ? 0 : 1;
    } else if (*bn) {
      bn_opts.resolutions = parse_resolutions(bn_res);
      if (bn_scaling == "fixed-stride") {
        bn_opts.scaling = bench::ConvScaling::fixed_stride;
      } else if (bn_scaling == "fixed-s") {
        bn_opts.scaling = bench::ConvScaling::fixed_positions;
      } else {
        throw ConfigError("--scaling must be fixed-stride or fixed-s");
      }
      const auto csv = bench::format_bench_csv(bench::run_bench(bn_opts), bn_opts);
      if (bn_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        write_file_text(bn_out, csv);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
