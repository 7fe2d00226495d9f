// Desk-scale trainer properties beyond the numbered acceptance criteria.
// Each case trains on the default synthetic set, so this binary takes
// about a minute.

#include <cmath>

#include "doctest.h"
#include "fpnn/trainer/synthetic.hpp"
#include "fpnn/trainer/train.hpp"
#include "support/oracles.hpp"

using namespace fpnn;
using namespace fpnn::trainer;

namespace {

struct DeskData {
  testing::TempDir dir{"desk"};
  SyntheticOutput data = generate_synthetic(SyntheticSpec{}, dir.file("data"));

  TrainConfig config(std::size_t iterations) const {
    auto cfg = TrainConfig::desk_preset();
    cfg.train_manifest = data.train_manifest;
    cfg.test_manifest = data.test_manifest;
    cfg.sgd.max_iterations = iterations;
    return cfg;
  }
};

DeskData& desk() {
  static DeskData d;
  return d;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(std::max(aa * bb, 1e-300));
}

}  // namespace

TEST_CASE("untrained network sits at chance on balanced classes") {
  const auto r = train(desk().config(0));
  REQUIRE(r.test.has_value());
  CHECK(r.test->total == 100);
  CHECK(std::abs(r.test->accuracy - 0.2) <= 0.05);
}

TEST_CASE("long-range filters are no worse than short ones") {
  auto cfg = desk().config(400);
  const auto long_range = train(cfg);
  cfg.init.length_low = 0.1;
  cfg.init.length_high = 0.2;
  const auto short_range = train(cfg);
  MESSAGE("span [0.2,0.8]: " << long_range.test->accuracy << "  span [0.1,0.2]: " << short_range.test->accuracy);
  CHECK(long_range.test->accuracy >= short_range.test->accuracy - 0.02);

  SUBCASE("training accuracy is at least test accuracy") {
    const auto on_train = evaluate(long_range.checkpoint, desk().data.train_manifest);
    CHECK(on_train.accuracy >= long_range.test->accuracy);
  }
  SUBCASE("features cluster by class") {
    const auto table = extract_features(long_range.checkpoint, desk().data.test_manifest);
    double intra = 0, inter = 0;
    std::size_t n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      for (std::size_t j = i + 1; j < table.rows.size(); ++j) {
        const double c = cosine(table.rows[i], table.rows[j]);
        if (table.labels[i] == table.labels[j]) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    MESSAGE("mean cosine intra " << intra / n_intra << " inter " << inter / n_inter);
    CHECK(intra / n_intra > inter / n_inter);
  }
}
