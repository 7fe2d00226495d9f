#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "fpnn/common/error.hpp"
#include "fpnn/common/rng.hpp"
#include "fpnn/nn/grad_check.hpp"
#include "fpnn/nn/layers.hpp"
#include "fpnn/nn/net_spec.hpp"
#include "fpnn/nn/sgd.hpp"
#include "fpnn/trainer/gradcheck_suite.hpp"

using namespace fpnn;
using namespace fpnn::nn;

namespace {

Tensor<double> matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v) {
  Tensor<double> t({rows, cols});
  std::copy(v.begin(), v.end(), t.values().begin());
  return t;
}

Tensor<double> random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1, double hi = 1) {
  Tensor<double> t({rows, cols});
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

// FC whose backward returns the negated input gradient.
class SignFlippedFc final : public Layer<double> {
 public:
  explicit SignFlippedFc(Rng& rng) : inner_(4, 3, rng) {}
  std::string kind() const override { return "broken"; }
  Tensor<double> forward(const Tensor<double>& x, Mode mode) override { return inner_.forward(x, mode); }
  Tensor<double> backward(const Tensor<double>& dy) override {
    auto dx = inner_.backward(dy);
    for (double& v : dx.values()) v = -v;
    return dx;
  }

 private:
  FullyConnected<double> inner_;
};

}  // namespace

TEST_CASE("fully connected forward") {
  Rng rng(1);
  FullyConnected<double> fc(2, 2, rng);
  fc.weight()(0, 0) = 1;
  fc.weight()(0, 1) = 1;
  fc.weight()(1, 0) = 0;
  fc.weight()(1, 1) = 1;
  fc.bias()[0] = 0.5;
  fc.bias()[1] = 0;
  const auto y = fc.forward(matrix(1, 2, {1, 2}), Mode::eval);
  CHECK(y(0, 0) == 3.5);
  CHECK(y(0, 1) == 2.0);

  fc.weight()(0, 1) = 0;
  fc.weight()(1, 1) = 1;
  fc.weight()(0, 0) = 1;
  fc.bias()[0] = 0;
  const auto x = random_matrix(rng, 3, 2);
  const auto id = fc.forward(x, Mode::eval);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(id[i] == x[i]);

  CHECK_THROWS_AS(fc.forward(random_matrix(rng, 3, 5), Mode::eval), ContractError);

  FullyConnected<double> big(100, 50, rng);
  const double bound = std::sqrt(6.0 / 150.0);
  for (double w : big.weight().values()) CHECK(std::abs(w) <= bound);
  for (double b : big.bias().values()) CHECK(b == 0.0);
}

TEST_CASE("batch norm") {
  Rng rng(2);
  BatchNorm<double> bn(5);
  const auto x = random_matrix(rng, 16, 5, -3, 7);
  const auto y = bn.forward(x, Mode::train);
  for (std::size_t f = 0; f < 5; ++f) {
    double mean = 0, var = 0;
    for (std::size_t b = 0; b < 16; ++b) mean += y(b, f);
    mean /= 16;
    for (std::size_t b = 0; b < 16; ++b) var += (y(b, f) - mean) * (y(b, f) - mean);
    var /= 16;
    CHECK(std::abs(mean) <= 1e-6);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));  // epsilon shifts the variance slightly
  }

  SUBCASE("standardized input passes through") {
    auto z = y;
    BatchNorm<double> bn2(5);
    const auto out = bn2.forward(z, Mode::train);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(out[i] == doctest::Approx(z[i]).epsilon(1e-5));
  }
  SUBCASE("running statistics") {
    // One update from mean 0 / var 1 with momentum 0.9.
    double m0 = 0;
    for (std::size_t b = 0; b < 16; ++b) m0 += x(b, 0);
    m0 /= 16;
    CHECK(bn.running_mean()[0] == doctest::Approx(0.1 * m0));
    BatchNorm<double> fresh(5);
    const auto e = fresh.forward(x, Mode::eval);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(e[i] == doctest::Approx(x[i] / std::sqrt(1 + 1e-5)));
  }
  SUBCASE("single-sample batch is rejected in train mode") {
    BatchNorm<double> b1(3);
    CHECK_THROWS_AS(b1.forward(random_matrix(rng, 1, 3), Mode::train), ContractError);
    CHECK_NOTHROW(b1.forward(random_matrix(rng, 1, 3), Mode::eval));
  }
  SUBCASE("parameter kinds") {
    const auto params = bn.parameters();
    REQUIRE(params.size() == 4);
    CHECK(params[0].kind == ParamKind::exempt);
    CHECK(params[2].kind == ParamKind::buffer);
    CHECK_FALSE(params[3].trainable());
  }
}

TEST_CASE("relu and dropout") {
  Relu<double> relu;
  const auto y = relu.forward(matrix(1, 2, {-3, 3}), Mode::train);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 3.0);
  const auto dx = relu.backward(matrix(1, 2, {5, 7}));
  CHECK(dx[0] == 0.0);
  CHECK(dx[1] == 7.0);

  Rng rng(3);
  const auto x = random_matrix(rng, 4, 8);
  Dropout<double> none(0.0, 1);
  const auto same = none.forward(x, Mode::train);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);

  Dropout<double> half(0.5, 42);
  const auto ev = half.forward(x, Mode::eval);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(ev[i] == x[i]);

  // Mask is a function of the seed and is reused by backward.
  const auto a = half.forward(x, Mode::train);
  const auto b = half.forward(x, Mode::train);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  Tensor<double> ones({4, 8});
  for (double& v : ones.values()) v = 1.0;
  const auto g = half.backward(ones);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(g[i] == (a[i] == 0.0 ? 0.0 : 2.0));
  half.reseed(43);
  const auto c = half.forward(x, Mode::train);
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));

  CHECK_THROWS_AS(Dropout<double>(1.0), ConfigError);
  CHECK_THROWS_AS(Dropout<double>(-0.1), ConfigError);
}

TEST_CASE("inverted dropout preserves the expectation") {
  Tensor<double> x({1, 10});
  for (std::size_t i = 0; i < 10; ++i) x[i] = 1.0 + i;
  Dropout<double> d(0.5);
  std::vector<double> sum(10, 0.0);
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    d.reseed(static_cast<std::uint64_t>(t));
    const auto y = d.forward(x, Mode::train);
    for (std::size_t i = 0; i < 10; ++i) sum[i] += y[i];
  }
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(sum[i] / trials - x[i]) <= 0.02 * x[i]);
}

TEST_CASE("softmax cross-entropy") {
  const auto uniform_logits = matrix(2, 4, {0, 0, 0, 0, 3, 3, 3, 3});
  const auto r = softmax_cross_entropy(uniform_logits, {1, 3});
  CHECK(r.loss == doctest::Approx(std::log(4.0)));
  CHECK(r.grad(0, 1) == doctest::Approx((0.25 - 1.0) / 2));
  CHECK(r.grad(0, 0) == doctest::Approx(0.25 / 2));

  const auto big = matrix(1, 2, {1e6, 0});
  const auto s = softmax_cross_entropy(big, {0});
  CHECK(std::isfinite(s.loss));
  CHECK(s.loss == doctest::Approx(0.0));
  CHECK(s.correct == 1);
  const auto wrong = softmax_cross_entropy(big, {1});
  CHECK(wrong.loss == doctest::Approx(1e6));
  CHECK(wrong.correct == 0);

  CHECK_THROWS_AS(softmax_cross_entropy(big, {2}), ContractError);
  CHECK_THROWS_AS(softmax_cross_entropy(big, {-1}), ContractError);
  CHECK_THROWS_AS(softmax_cross_entropy(big, {0, 1}), ContractError);
}

TEST_CASE("sgd update rule") {
  Tensor<double> w({1, 2});
  w[0] = 1.0;
  w[1] = -2.0;
  const std::vector<Parameter<double>> params = {{"w", &w, ParamKind::weight, false}};

  SUBCASE("plain step") {
    SgdConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;
    Sgd<double> opt(cfg);
    w.grad()[0] = 2.0;
    w.grad()[1] = -1.0;
    opt.step(params);
    CHECK(w[0] == doctest::Approx(0.8));
    CHECK(w[1] == doctest::Approx(-1.9));
  }
  SUBCASE("momentum accumulates") {
    SgdConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.9;
    cfg.weight_decay = 0.0;
    Sgd<double> opt(cfg);
    w.grad()[0] = 1.0;
    opt.step(params);
    const double after_one = w[0];
    opt.step(params);
    CHECK(after_one == doctest::Approx(0.9));
    CHECK(w[0] - after_one == doctest::Approx(-0.1 * 1.9));
    CHECK(opt.velocities().at("w")[0] == doctest::Approx(-0.19));
  }
  SUBCASE("decay only") {
    SgdConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.5;
    Sgd<double> opt(cfg);
    opt.step(params);
    CHECK(w[0] == doctest::Approx(1.0 * (1 - 0.005)));
    CHECK(w[1] == doctest::Approx(-2.0 * (1 - 0.005)));
  }
  SUBCASE("exempt, buffer and frozen parameters") {
    SgdConfig cfg;
    cfg.weight_decay = 0.5;
    Sgd<double> opt(cfg);
    Tensor<double> e({1}), b({1}), f({1});
    e[0] = b[0] = f[0] = 3.0;
    b.grad()[0] = f.grad()[0] = 1.0;
    opt.step({{"e", &e, ParamKind::exempt, false}, {"b", &b, ParamKind::buffer, false},
              {"f", &f, ParamKind::weight, true}});
    CHECK(e[0] == 3.0);
    CHECK(b[0] == 3.0);
    CHECK(f[0] == 3.0);
  }
  SUBCASE("config validation") {
    SgdConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SgdConfig{};
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SgdConfig{};
    cfg.weight_decay = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("layers pass the finite-difference check") {
  Rng rng(4);
  FullyConnected<double> fc(6, 4, rng);
  CHECK(check_layer(fc, random_matrix(rng, 5, 6), Mode::train, rng).max_rel_error() <= 1e-6);
  BatchNorm<double> bn(4);
  for (double& v : bn.gamma().values()) v = uniform(rng, 0.5, 2);
  for (double& v : bn.beta().values()) v = uniform(rng, -1, 1);
  CHECK(check_layer(bn, random_matrix(rng, 8, 4), Mode::train, rng).max_rel_error() <= 1e-5);
  Dropout<double> dr(0.3, 9);
  CHECK(check_layer(dr, random_matrix(rng, 4, 4), Mode::train, rng).max_rel_error() <= 1e-6);

  for (const char* name : {"fc", "batchnorm", "relu", "dropout", "softmax", "network"}) {
    CAPTURE(name);
    CHECK(trainer::run_gradcheck(name, 20, 5).passed());
  }
  CHECK_THROWS(trainer::run_gradcheck("nonsense", 1, 1));
}

TEST_CASE("the harness flags a sign-flipped backward") {
  Rng rng(5);
  SignFlippedFc broken(rng);
  const auto report = check_layer(broken, random_matrix(rng, 3, 4), Mode::train, rng);
  CHECK(report.max_rel_error() >= 0.1);
  CHECK_FALSE(report.passed(1e-5));
  CHECK(report.summary().find("input") != std::string::npos);
}

TEST_CASE("net specs") {
  const auto one = make_net_spec(Architecture::one_fc, 1024, 8, 4, 40);
  CHECK_NOTHROW(one.validate());
  REQUIRE(one.layers.size() == 4);
  CHECK(one.layers[0].kind == LayerKind::probing_block);
  CHECK(one.layers[1].kind == LayerKind::batch_norm);
  CHECK(one.layers[2].kind == LayerKind::relu);
  CHECK(one.layers[3].kind == LayerKind::fully_connected);
  CHECK(one.layers[3].parameter_count() == 41000);
  CHECK(one.layers[0].parameter_count() == 1024 * 8 * (3 + 4));

  const auto four = make_net_spec(Architecture::four_fc, 1024, 8, 4, 40);
  CHECK_NOTHROW(four.validate());
  std::vector<const LayerSpec*> fcs;
  for (const auto& l : four.layers)
    if (l.kind == LayerKind::fully_connected) fcs.push_back(&l);
  REQUIRE(fcs.size() == 4);
  CHECK(fcs[0]->in == 1024);
  CHECK(fcs[0]->out == 1024);
  CHECK(fcs[2]->out == 1024);
  CHECK(fcs[3]->out == 40);
  std::size_t dropouts = 0;
  for (const auto& l : four.layers)
    if (l.kind == LayerKind::dropout) {
      ++dropouts;
      CHECK(l.rate == 0.5);
    }
  CHECK(dropouts == 3);

  auto bad = one;
  bad.layers[3].in = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(parse_architecture("4fc") == Architecture::four_fc);
  CHECK(parse_architecture("one_fc") == Architecture::one_fc);
  CHECK_THROWS_AS(parse_architecture("two_fc"), ConfigError);

  Rng rng(6);
  auto head = build_head<double>(four, rng);
  CHECK(head.size() == four.layers.size() - 1);
  Tensor<double> x({3, 1024});
  const auto logits = head.forward(x, Mode::eval);
  CHECK(logits.dim(0) == 3);
  CHECK(logits.dim(1) == 40);
  CHECK(head.parameters("head.").front().name == "head.0.bn.gamma");
}

TEST_CASE("eval forward is a pure function of parameters and input") {
  Rng rng(7);
  const auto spec = make_net_spec(Architecture::four_fc, 16, 2, 1, 3, {32, 0.5, 0.9, 1e-5});
  auto head = build_head<double>(spec, rng);
  const auto x = random_matrix(rng, 4, 16);
  head.forward(x, Mode::train);  // moves running statistics
  const auto a = head.forward(x, Mode::eval);
  head.reseed(99);
  const auto b = head.forward(x, Mode::eval);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}
