#include "fpnn/trainer/gradcheck_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fpnn/common/error.hpp"
#include "fpnn/common/rng.hpp"
#include "fpnn/nn/grad_check.hpp"
#include "fpnn/probing/layers.hpp"
#include "fpnn/trainer/model.hpp"

namespace fpnn::trainer {

namespace {

using field::BasicField3D;
using field::ChannelRole;
using field::FieldSampler;
using nn::GradBlock;
using nn::Tensor;

constexpr double kIsolated = 1e-5;
constexpr double kComposed = 1e-4;
constexpr int kFieldRes = 8;

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

/// Each channel is a + bx + cy + dz + exy + fyz + gzx + hxyz with random
/// coefficients scaled to keep values O(1) over the grid.
BasicField3D<double> trilinear_field(Rng& rng, std::vector<ChannelRole> roles) {
  BasicField3D<double> f(kFieldRes, roles);
  const double s = 1.0 / kFieldRes;
  for (std::size_t c = 0; c < roles.size(); ++c) {
    const auto k = random_vector(rng, 8);
    for (int z = 0; z < kFieldRes; ++z) {
      for (int y = 0; y < kFieldRes; ++y) {
        for (int x = 0; x < kFieldRes; ++x) {
          const double X = x * s, Y = y * s, Z = z * s;
          f.at(c, x, y, z) = k[0] + k[1] * X + k[2] * Y + k[3] * Z + k[4] * X * Y + k[5] * Y * Z + k[6] * Z * X +
                             k[7] * X * Y * Z;
        }
      }
    }
  }
  return f;
}

/// Locations inside [1, R-2]^3 so finite-difference steps never clamp.
void randomize_locations(probing::FilterBank<double>& bank, Rng& rng) {
  for (double& v : bank.locations().values()) v = uniform(rng, 1.0, kFieldRes - 2.0);
}

probing::FilterBank<double> random_bank(Rng& rng, std::size_t c, std::size_t n, std::size_t t) {
  probing::FilterBank<double> bank(c, n, t, kFieldRes);
  randomize_locations(bank, rng);
  for (double& w : bank.weights().values()) w = uniform(rng, -1.0, 1.0);
  return bank;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

double check_sensor(Rng& rng) {
  const auto field = trilinear_field(rng, {ChannelRole::other, ChannelRole::other});
  const FieldSampler<double> sampler(field);
  auto bank = random_bank(rng, 3, 4, 2);
  const auto upstream = random_vector(rng, 3 * 4 * 2);
  const auto out = probing::sensor_forward(bank, sampler);
  probing::sensor_backward<double>(bank, out, upstream);
  std::vector<GradBlock> blocks{{"locations", bank.locations().values(), copy(bank.locations().grad())}};
  const auto loss = [&] { return dot(probing::sensor_forward(bank, sampler).values, upstream); };
  return nn::grad_check(loss, blocks).max_rel_error();
}

double check_gaussian(Rng& rng) {
  auto x = random_vector(rng, 16, -3.0, 3.0);
  const double sigma = uniform(rng, 0.5, 2.0);
  const auto upstream = random_vector(rng, x.size());
  std::vector<double> dx(x.size()), y(x.size());
  probing::gaussian_backward<double>(x, upstream, sigma, dx);
  std::vector<GradBlock> blocks{{"input", x, dx}};
  const auto loss = [&] {
    probing::gaussian_forward<double>(x, sigma, y);
    return dot(y, upstream);
  };
  return nn::grad_check(loss, blocks).max_rel_error();
}

double check_dotproduct(Rng& rng) {
  auto bank = random_bank(rng, 4, 3, 2);
  auto input = random_vector(rng, 4 * 3 * 2);
  const auto upstream = random_vector(rng, 4);
  const auto dinput = probing::dotproduct_backward<double>(bank, input, upstream);
  std::vector<GradBlock> blocks{{"input", input, dinput},
                                {"weights", bank.weights().values(), copy(bank.weights().grad())}};
  const auto loss = [&] { return dot(probing::dotproduct_forward<double>(bank, input), upstream); };
  return nn::grad_check(loss, blocks).max_rel_error();
}

double check_probing(Rng& rng) {
  const std::vector<ChannelRole> roles{ChannelRole::distance, ChannelRole::normal_x, ChannelRole::normal_y,
                                       ChannelRole::normal_z};
  const auto field = trilinear_field(rng, roles);
  const FieldSampler<double> sampler(field);
  auto bank = random_bank(rng, 3, 4, 4);
  const probing::ProbingLayer<double> layer(uniform(rng, 0.5, 2.0), roles);
  const auto upstream = random_vector(rng, 3);
  probing::ProbingCache<double> cache;
  layer.forward(bank, sampler, cache);
  layer.backward(bank, cache, upstream);
  std::vector<GradBlock> blocks{{"locations", bank.locations().values(), copy(bank.locations().grad())},
                                {"weights", bank.weights().values(), copy(bank.weights().grad())}};
  const auto loss = [&] {
    probing::ProbingCache<double> c;
    return dot(layer.forward(bank, sampler, c), upstream);
  };
  return nn::grad_check(loss, blocks).max_rel_error();
}

Tensor<double> random_tensor(Rng& rng, std::vector<std::size_t> shape, double away_from_zero = 0.0) {
  Tensor<double> t(std::move(shape));
  for (double& v : t.values()) {
    v = uniform(rng, -1.0, 1.0);
    if (away_from_zero > 0.0) v = std::copysign(away_from_zero + std::abs(v), v);
  }
  return t;
}

double check_fc(Rng& rng) {
  nn::FullyConnected<double> layer(5, 4, rng);
  for (double& b : layer.bias().values()) b = uniform(rng, -1.0, 1.0);
  return nn::check_layer(layer, random_tensor(rng, {3, 5}), nn::Mode::train, rng).max_rel_error();
}

double check_batchnorm(Rng& rng) {
  nn::BatchNorm<double> layer(3);
  for (double& g : layer.gamma().values()) g = uniform(rng, 0.5, 1.5);
  for (double& b : layer.beta().values()) b = uniform(rng, -1.0, 1.0);
  return nn::check_layer(layer, random_tensor(rng, {4, 3}), nn::Mode::train, rng).max_rel_error();
}

double check_relu(Rng& rng) {
  nn::Relu<double> layer;
  return nn::check_layer(layer, random_tensor(rng, {3, 6}, 0.05), nn::Mode::train, rng).max_rel_error();
}

double check_dropout(Rng& rng) {
  nn::Dropout<double> layer(0.5, rng());
  return nn::check_layer(layer, random_tensor(rng, {4, 6}), nn::Mode::train, rng).max_rel_error();
}

double check_softmax(Rng& rng) {
  auto logits = random_tensor(rng, {4, 5});
  for (double& v : logits.values()) v *= 3.0;
  std::vector<int> labels(4);
  for (int& l : labels) l = static_cast<int>(uniform_index(rng, 5));
  const auto r = nn::softmax_cross_entropy(logits, labels);
  std::vector<GradBlock> blocks{{"logits", logits.values(), copy(r.grad.values())}};
  const auto loss = [&] { return nn::softmax_cross_entropy(logits, labels).loss; };
  return nn::grad_check(loss, blocks).max_rel_error();
}

/// Composed 1-FC network: probing -> BN -> ReLU -> FC -> softmax CE over a
/// batch of distinct fields. Instances whose ReLU inputs sit near the kink
/// are redrawn.
double check_network(Rng& rng) {
  const std::vector<ChannelRole> roles{ChannelRole::distance, ChannelRole::normal_x, ChannelRole::normal_y,
                                       ChannelRole::normal_z};
  probing::InitConfig init{2, 1, 4, 0.2, 0.8, rng()};
  constexpr std::size_t kBatch = 4, kClasses = 3;
  for (;;) {
    auto spec = nn::make_net_spec(nn::Architecture::one_fc, init.filter_count(), 4, roles.size(), kClasses);
    Model<double> model(spec, init, kFieldRes, uniform(rng, 0.5, 2.0), roles, rng());
    randomize_locations(model.bank(), rng);
    for (double& w : model.bank().weights().values()) w = uniform(rng, -1.0, 1.0);
    std::vector<FieldSampler<double>> samplers;
    for (std::size_t b = 0; b < kBatch; ++b) samplers.emplace_back(trilinear_field(rng, roles));
    std::vector<int> labels(kBatch);
    for (int& l : labels) l = static_cast<int>(uniform_index(rng, kClasses));
    const std::uint64_t dropout_seed = rng();

    const auto features = [&](std::vector<probing::ProbingCache<double>>& caches) {
      std::vector<std::vector<double>> rows;
      caches.resize(kBatch);
      for (std::size_t b = 0; b < kBatch; ++b) rows.push_back(model.probe(samplers[b], caches[b]));
      return stack_rows(rows);
    };
    std::vector<probing::ProbingCache<double>> caches;
    const auto x = features(caches);
    const auto pre_relu = model.head().forward_until(x, nn::Mode::train, 0);
    const auto near_kink = std::any_of(pre_relu.values().begin(), pre_relu.values().end(),
                                       [](double v) { return std::abs(v) < 0.02; });
    if (near_kink) continue;

    model.zero_grad();
    model.train_batch(x, caches, labels, dropout_seed);
    std::vector<GradBlock> blocks;
    for (auto& p : model.parameters()) {
      if (p.trainable()) blocks.push_back({p.name, p.tensor->values(), copy(p.tensor->grad())});
    }
    const auto loss = [&] {
      std::vector<probing::ProbingCache<double>> c;
      model.head().reseed(dropout_seed);
      const auto logits = model.head().forward(features(c), nn::Mode::train);
      return nn::softmax_cross_entropy(logits, labels).loss;
    };
    return nn::grad_check(loss, blocks).max_rel_error();
  }
}

}  // namespace

const std::vector<std::string>& gradcheck_names() {
  static const std::vector<std::string> names = {"sensor", "gaussian", "dotproduct", "probing", "fc",
                                                 "batchnorm", "relu", "dropout", "softmax", "network"};
  return names;
}

GradCheckCase run_gradcheck(const std::string& name, std::size_t instances, std::uint64_t seed) {
  double (*fn)(Rng&) = nullptr;
  double tolerance = kIsolated;
  if (name == "sensor") fn = check_sensor;
  if (name == "gaussian") fn = check_gaussian;
  if (name == "dotproduct") fn = check_dotproduct;
  if (name == "probing") fn = check_probing, tolerance = kComposed;
  if (name == "fc") fn = check_fc;
  if (name == "batchnorm") fn = check_batchnorm;
  if (name == "relu") fn = check_relu;
  if (name == "dropout") fn = check_dropout;
  if (name == "softmax") fn = check_softmax;
  if (name == "network") fn = check_network, tolerance = kComposed;
  if (!fn) throw ConfigError("unknown gradient check '" + name + "'");

  GradCheckCase result{name, instances, 0.0, tolerance};
  Rng rng(derive_seed(seed, {hash_string(name)}));
  for (std::size_t i = 0; i < instances; ++i) result.max_rel_error = std::max(result.max_rel_error, fn(rng));
  return result;
}

}  // namespace fpnn::trainer
