#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/field/distance.hpp"
#include "fpnn/ingest/voxelize.hpp"
#include "fpnn/nn/sgd.hpp"
#include "fpnn/trainer/checkpoint.hpp"
#include "fpnn/trainer/config.hpp"
#include "fpnn/trainer/dataset.hpp"
#include "fpnn/trainer/model.hpp"
#include "fpnn/trainer/synthetic.hpp"
#include "fpnn/trainer/train.hpp"
#include "support/oracles.hpp"

using namespace fpnn;
using namespace fpnn::trainer;
namespace fs = std::filesystem;

namespace {

// Two-class set small enough to train in a fraction of a second.
struct TinyTask {
  testing::TempDir dir{"trainer"};
  SyntheticOutput data;
  TrainConfig cfg;

  TinyTask() {
    SyntheticSpec spec;
    spec.classes = {Primitive::sphere, Primitive::torus};
    spec.train_per_class = 6;
    spec.test_per_class = 3;
    spec.resolution = 16;
    data = generate_synthetic(spec, dir.file("data"));
    cfg = TrainConfig::desk_preset();
    cfg.resolution = 16;
    cfg.init.grid = 2;
    cfg.init.points_per_filter = 4;
    cfg.sgd.batch_size = 8;
    cfg.sgd.max_iterations = 12;
    cfg.train_manifest = data.train_manifest;
    cfg.test_manifest = data.test_manifest;
    cfg.out_dir = dir.file("run");
  }
};

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.iteration = 42;
  c.config_echo = "architecture = one_fc\nresolution = 16\n";
  c.blocks.push_back({"probing.locations", {2, 3, 3}, std::vector<float>(18, 1.5f)});
  c.blocks.push_back({"head.0.bn.gamma", {4}, {1, 2, 3, 4}});
  c.blocks.push_back({"velocity/head.0.bn.gamma", {4}, {0.1f, -0.2f, 0.0f, 1e-9f}});
  Rng rng(5);
  rng();
  c.rng_state = rng_to_text(rng);
  return c;
}

std::vector<float> values_of(const nn::Tensor<float>& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

TEST_CASE("config text") {
  const auto cfg = parse_config(
      "# comment\n"
      "architecture = four_fc\n"
      "resolution = 24   # trailing comment\n"
      "channels = distance+normals\n"
      "augment = R15+T01+S\n"
      "learning_rate = 0.005\n"
      "train_manifest = data/train.txt\n",
      "/base");
  CHECK(cfg.architecture == nn::Architecture::four_fc);
  CHECK(cfg.resolution == 24);
  CHECK(cfg.normals);
  CHECK(cfg.channels() == 4);
  CHECK(cfg.sgd.learning_rate == 0.005);
  CHECK(cfg.train_manifest == "/base/data/train.txt");
  CHECK(cfg.effective_sigma() == doctest::Approx(0.1 * (24 - 4)));
  CHECK(cfg.init.grid == TrainConfig::desk_preset().init.grid);

  try {
    parse_config("resolution = 32\n\nbogus_key = 3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("resolution = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config("resolution\n"), ParseError);
  CHECK_THROWS_AS(parse_config("channels = rgb\n"), ParseError);
  CHECK_THROWS_AS(parse_config("architecture = resnet\n"), ParseError);
}

TEST_CASE("config round trip and echo") {
  auto cfg = TrainConfig::full_preset();
  cfg.out_dir = "/tmp/somewhere";
  cfg.sgd.max_iterations = 5;
  const auto back = parse_config(cfg.to_text());
  CHECK(back.to_text() == cfg.to_text());
  CHECK(back.echo() == cfg.echo());

  auto other = cfg;
  other.out_dir = "/elsewhere";
  other.sgd.max_iterations = 9999;
  other.workers = 4;
  other.eval_every = 10;
  CHECK(other.echo() == cfg.echo());
  other.sgd.learning_rate = 0.02;
  CHECK(other.echo() != cfg.echo());
  CHECK(cfg.echo().find("sigma = ") != std::string::npos);

  const auto full = TrainConfig::full_preset();
  CHECK(full.resolution == 64);
  CHECK(full.filters() == 1024);
  CHECK(full.channels() == 4);
  CHECK(full.sgd.batch_size == 1024);
  CHECK(full.sgd.max_iterations == 80000);
  const auto desk = TrainConfig::desk_preset();
  CHECK(desk.resolution == 32);
  CHECK(desk.filters() == 64);
  CHECK(desk.sgd.batch_size == 32);
  CHECK(desk.sgd.max_iterations == 2000);
}

TEST_CASE("config validation") {
  auto cfg = TrainConfig::desk_preset();
  CHECK_NOTHROW(cfg.validate());
  cfg.freeze_probing = cfg.freeze_head = true;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig::desk_preset();
  cfg.sgd.batch_size = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig::desk_preset();
  cfg.num_classes = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  testing::TempDir dir("config");
  write_file_text(dir.file("run.cfg"), "train_manifest = missing.txt\n");
  CHECK_THROWS_WITH_AS(load_config(dir.file("run.cfg")), doctest::Contains("manifest not found"), ConfigError);
  write_file_text(dir.file("bad.cfg"), "resolution = 32\nnope = 1\n");
  try {
    load_config(dir.file("bad.cfg"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bad.cfg") != std::string::npos);
  }
}

TEST_CASE("checkpoint codec") {
  const auto c = sample_checkpoint();
  const auto bytes = encode_checkpoint(c);
  CHECK(decode_checkpoint(bytes) == c);
  CHECK(encode_checkpoint(decode_checkpoint(bytes)) == bytes);
  CHECK(c.find("head.0.bn.gamma") != nullptr);
  CHECK(c.find("nope") == nullptr);

  testing::TempDir dir("ckpt");
  save_checkpoint(c, dir.file("a.ckpt"));
  CHECK(load_checkpoint(dir.file("a.ckpt")) == c);

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_checkpoint(b), doctest::Contains("magic"), FormatError);
  }
  SUBCASE("unsupported version") {
    auto b = bytes;
    b[4] = 99;
    CHECK_THROWS_WITH_AS(decode_checkpoint(b), doctest::Contains("version"), FormatError);
  }
  SUBCASE("every truncation is rejected") {
    for (std::size_t n = 0; n < bytes.size(); n += 7)
      CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(n)), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(1);
    CHECK_THROWS_WITH_AS(decode_checkpoint(b), doctest::Contains("trailing"), FormatError);
  }
  SUBCASE("load prefixes the path") {
    write_file_bytes(dir.file("junk.ckpt"), std::vector<std::uint8_t>{'J', 'U', 'N', 'K', 0, 0});
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("junk.ckpt")), doctest::Contains("junk.ckpt"), FormatError);
  }
}

TEST_CASE("rng state text") {
  Rng a(17);
  for (int i = 0; i < 10; ++i) a();
  Rng b = rng_from_text(rng_to_text(a));
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK_THROWS_AS(rng_from_text("not a state"), FormatError);
}

TEST_CASE("synthetic dataset") {
  testing::TempDir dir("synth");
  SyntheticSpec spec;
  spec.train_per_class = 4;
  spec.test_per_class = 2;
  const auto out = generate_synthetic(spec, dir.file("a"));
  CHECK(out.files == 5 * 6);
  const auto train = load_dataset(out.train_manifest, {32, 2.0});
  const auto test = load_dataset(out.test_manifest, {32, 2.0});
  CHECK(train.size() == 20);
  CHECK(test.size() == 10);
  CHECK(train.classes() == 5);

  const auto again = generate_synthetic(spec, dir.file("b"));
  for (const auto& entry : fs::recursive_directory_iterator(dir.file("a") + "/shapes")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir.file("a"));
    CHECK(read_file_bytes(entry.path().string()) == read_file_bytes((fs::path(dir.file("b")) / rel).string()));
  }

  const auto parsed = parse_synthetic_spec("classes = box, cone\ntrain_per_class = 3\n");
  CHECK(parsed.classes == std::vector<Primitive>{Primitive::box, Primitive::cone});
  CHECK(parsed.train_per_class == 3);
  CHECK_THROWS_AS(parse_synthetic_spec("classes = box\n"), ConfigError);
  CHECK_THROWS_AS(parse_synthetic_spec("classes = box, blob\n"), ParseError);
  CHECK_THROWS_AS(parse_synthetic_spec("colour = red\n"), ParseError);
}

TEST_CASE("sphere distance field at the center cell matches the radius") {
  // Node i stands for the cell [i, i+1); with odd R the sphere's center is a
  // cell center, so the center cell's node sits exactly on it.
  for (int r : {17, 25, 33, 47}) {
    CAPTURE(r);
    Rng rng(1);
    const ingest::GridFrame frame{r, 2.0};
    const auto s = ingest::normalize(make_primitive(Primitive::sphere, 0.0, r, rng), frame);
    const auto d = field::distance_transform(ingest::voxelize(s, r));
    const double radius = frame.object_size() / 2;
    CHECK(std::abs(d.at(0, r / 2, r / 2, r / 2) - radius) <= 1.5);
  }
}

TEST_CASE("field source caching") {
  TinyTask task;
  task.cfg.field_cache_dir = task.dir.file("cache");
  const auto data = load_dataset(task.cfg.train_manifest, task.cfg.frame());
  FieldSource src(task.cfg);
  const auto a = src.unperturbed(data.shapes[0]);
  CHECK(a == src.unperturbed(data.shapes[0]));
  CHECK(fs::exists(src.cache_path(data.shapes[0])));
  FieldSource fresh(task.cfg);
  CHECK(*fresh.unperturbed(data.shapes[0]) == *a);
  CHECK(*src.get(data.shapes[0], ingest::PerturbMode{}, 5) == *a);
  const auto p1 = src.get(data.shapes[0], ingest::PerturbMode::parse("R15+T01+S"), 5);
  const auto p2 = src.get(data.shapes[0], ingest::PerturbMode::parse("R15+T01+S"), 5);
  CHECK(*p1 == *p2);
  CHECK_FALSE(*p1 == *a);
}

TEST_CASE("short training run") {
  TinyTask task;
  std::size_t calls = 0;
  TrainOptions opts;
  opts.on_iteration = [&](const MetricRow& m) {
    ++calls;
    CHECK(std::isfinite(m.loss));
  };
  const auto r = train(task.cfg, opts);
  CHECK(calls == 12);
  CHECK(r.metrics.size() == 12);
  CHECK(r.checkpoint.iteration == 12);
  REQUIRE(r.test.has_value());
  CHECK(r.test->total == 6);
  CHECK(fs::exists(task.cfg.out_dir + "/final.ckpt"));
  const auto csv = read_file_text(task.cfg.out_dir + "/metrics.csv");
  CHECK(csv.rfind("iteration,loss,train_acc,eval_acc,wall_ms\n", 0) == 0);

  SUBCASE("reloaded checkpoint reproduces the evaluation") {
    const auto ckpt = load_checkpoint(task.cfg.out_dir + "/final.ckpt");
    CHECK(ckpt == r.checkpoint);
    const auto e1 = evaluate(ckpt, task.cfg.test_manifest);
    CHECK(e1.accuracy == r.test->accuracy);
    const auto e2 = evaluate(ckpt, task.cfg.test_manifest, ingest::PerturbMode::parse("R15"), 3);
    const auto e3 = evaluate(ckpt, task.cfg.test_manifest, ingest::PerturbMode::parse("R15"), 3);
    CHECK(e2.confusion == e3.confusion);
    std::size_t sum = 0;
    for (const auto& row : e1.confusion)
      for (auto v : row) sum += v;
    CHECK(sum == 6);
  }
  SUBCASE("features") {
    const auto table = extract_features(r.checkpoint, task.cfg.test_manifest);
    CHECK(table.rows.size() == 6);
    CHECK(table.rows[0].size() == task.cfg.filters());
    const auto text = format_features(table);
    CHECK(text.rfind("id,label,f0,f1,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    const auto logits = extract_features(r.checkpoint, task.cfg.test_manifest, 2);
    CHECK(logits.rows[0].size() == 2);
  }
  SUBCASE("resume rejects a different configuration") {
    auto cfg = task.cfg;
    cfg.sgd.learning_rate = 0.5;
    TrainOptions o;
    o.resume = task.cfg.out_dir + "/final.ckpt";
    CHECK_THROWS_WITH_AS(train(cfg, o), doctest::Contains("different configuration"), ConfigError);
  }
  SUBCASE("fine-tuning") {
    auto cfg = task.cfg;
    cfg.out_dir = task.dir.file("ft");
    cfg.freeze_probing = cfg.freeze_head = true;
    CHECK_THROWS_AS(fine_tune(r.checkpoint, cfg), ConfigError);
    cfg.freeze_head = false;
    cfg.resolution = 24;
    CHECK_THROWS_AS(fine_tune(r.checkpoint, cfg), ConfigError);
    cfg.resolution = 16;
    const auto ft = fine_tune(r.checkpoint, cfg);
    CHECK(ft.checkpoint.find("probing.locations")->values == r.checkpoint.find("probing.locations")->values);
  }
}

TEST_CASE("frozen probing keeps the filters at their initialization") {
  TinyTask task;
  task.cfg.freeze_probing = true;
  const auto r = train(task.cfg);
  const auto init = Model<float>::from_config(task.cfg, 2);
  auto& bank = const_cast<Model<float>&>(init).bank();
  CHECK(r.checkpoint.find("probing.locations")->values == values_of(bank.locations()));
  CHECK(r.checkpoint.find("probing.weights")->values == values_of(bank.weights()));
  CHECK(r.checkpoint.find("velocity/probing.locations") == nullptr);
}

TEST_CASE("a non-finite loss aborts with a diagnostic checkpoint") {
  TinyTask task;
  TrainOptions opts;
  opts.init_hook = [](Model<float>& m) { m.bank().weights()[0] = NAN; };
  CHECK_THROWS_AS(train(task.cfg, opts), NumericError);
  CHECK(fs::exists(task.cfg.out_dir + "/diagnostic.ckpt"));
}

TEST_CASE("loss on a fixed batch decreases") {
  TinyTask task;
  const auto data = load_dataset(task.cfg.train_manifest, task.cfg.frame());
  FieldSource src(task.cfg);
  auto model = Model<float>::from_config(task.cfg, 2);
  std::vector<std::shared_ptr<const field::Field3D>> fields;
  std::vector<int> labels;
  for (const auto& s : data.shapes) {
    fields.push_back(src.unperturbed(s));
    labels.push_back(s.label);
  }
  std::vector<field::FieldSampler<float>> samplers;
  for (const auto& f : fields) samplers.emplace_back(*f);

  auto sgd_cfg = task.cfg.sgd;
  sgd_cfg.learning_rate = 1e-3;
  nn::Sgd<float> sgd(sgd_cfg);
  double previous = INFINITY;
  for (int step = 0; step < 10; ++step) {
    std::vector<probing::ProbingCache<float>> caches(samplers.size());
    std::vector<std::vector<float>> rows;
    for (std::size_t i = 0; i < samplers.size(); ++i) rows.push_back(model.probe(samplers[i], caches[i]));
    const auto result = model.train_batch(stack_rows(rows), caches, labels, 0);
    CHECK(result.loss < previous);
    previous = result.loss;
    sgd.step(model.parameters());
    model.bank().clamp_locations();
    model.zero_grad();
  }
}

TEST_CASE("parallel probing does not change the result") {
  TinyTask task;
  task.cfg.sgd.max_iterations = 6;
  const auto serial = train(task.cfg);
  task.cfg.workers = 3;
  task.cfg.out_dir = task.dir.file("parallel");
  const auto parallel = train(task.cfg);
  CHECK(encode_checkpoint(parallel.checkpoint) == encode_checkpoint(serial.checkpoint));
}

TEST_CASE("duplicate samples give identical feature rows") {
  TinyTask task;
  task.cfg.sgd.max_iterations = 4;
  const auto r = train(task.cfg);
  const auto lines = read_file_text(task.cfg.test_manifest);
  const auto first = lines.substr(0, lines.find('\n') + 1);
  write_file_text(task.dir.file("dup.txt"), first + first);
  fs::copy(fs::path(task.cfg.test_manifest).parent_path() / "shapes", task.dir.file("shapes"),
           fs::copy_options::recursive | fs::copy_options::skip_existing);
  const auto table = extract_features(r.checkpoint, task.dir.file("dup.txt"));
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0] == table.rows[1]);
}
