#include "fpnn/nn/net_spec.hpp"

#include <memory>

#include "fpnn/common/error.hpp"

namespace fpnn::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::probing_block:
      return "probing";
    case LayerKind::fully_connected:
      return "fc";
    case LayerKind::batch_norm:
      return "bn";
    case LayerKind::relu:
      return "relu";
    case LayerKind::dropout:
      return "dropout";
  }
  return "?";
}

std::size_t LayerSpec::parameter_count() const noexcept {
  switch (kind) {
    case LayerKind::probing_block:
      return out * points * (3 + channels);
    case LayerKind::fully_connected:
      return in * out + out;
    case LayerKind::batch_norm:
      return 2 * out;
    default:
      return 0;
  }
}

void NetSpec::validate() const {
  if (layers.empty() || layers.front().kind != LayerKind::probing_block) {
    throw ConfigError("network must start with a probing block");
  }
  if (classes < 2) throw ConfigError("network needs at least 2 classes");
  const auto& p = layers.front();
  if (p.out == 0 || p.points == 0 || p.channels == 0) throw ConfigError("probing block has a zero dimension");
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerKind::probing_block) throw ConfigError("only the first layer may be a probing block");
    if (l.in != layers[i - 1].out) {
      throw ConfigError("layer " + std::to_string(i) + " (" + to_string(l.kind) + ") expects width " +
                        std::to_string(l.in) + ", previous layer gives " + std::to_string(layers[i - 1].out));
    }
    if (l.kind != LayerKind::fully_connected && l.in != l.out) {
      throw ConfigError("layer " + std::to_string(i) + " must preserve width");
    }
    if (l.kind == LayerKind::dropout && !(l.rate >= 0.0 && l.rate < 1.0)) {
      throw ConfigError("dropout rate must lie in [0, 1)");
    }
  }
  if (layers.back().kind != LayerKind::fully_connected || layers.back().out != classes) {
    throw ConfigError("network must end in a fully connected layer producing " + std::to_string(classes) +
                      " logits");
  }
}

std::size_t NetSpec::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

std::string NetSpec::describe() const {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (i) s += " -> ";
    s += to_string(l.kind);
    if (l.kind == LayerKind::probing_block) {
      s += "(C=" + std::to_string(l.out) + ",N=" + std::to_string(l.points) + ",T=" + std::to_string(l.channels) +
           ")";
    } else if (l.kind == LayerKind::fully_connected) {
      s += "(" + std::to_string(l.in) + "->" + std::to_string(l.out) + ")";
    }
  }
  return s + " -> softmax(" + std::to_string(classes) + ")";
}

std::string to_string(Architecture arch) { return arch == Architecture::one_fc ? "one_fc" : "four_fc"; }

Architecture parse_architecture(const std::string& text) {
  if (text == "one_fc" || text == "1fc") return Architecture::one_fc;
  if (text == "four_fc" || text == "4fc") return Architecture::four_fc;
  throw ConfigError("unknown architecture '" + text + "' (expected one_fc or four_fc)");
}

NetSpec make_net_spec(Architecture arch, std::size_t filters, std::size_t points, std::size_t channels,
                      std::size_t classes, const HeadOptions& options) {
  NetSpec spec;
  spec.classes = classes;
  LayerSpec probing{LayerKind::probing_block, 0, filters};
  probing.points = points;
  probing.channels = channels;
  spec.layers.push_back(probing);

  const auto bn = [&](std::size_t width) {
    LayerSpec l{LayerKind::batch_norm, width, width};
    l.momentum = options.bn_momentum;
    l.epsilon = options.bn_epsilon;
    return l;
  };
  spec.layers.push_back(bn(filters));
  spec.layers.push_back({LayerKind::relu, filters, filters});

  std::size_t width = filters;
  if (arch == Architecture::four_fc) {
    for (int i = 0; i < 3; ++i) {
      spec.layers.push_back({LayerKind::fully_connected, width, options.hidden_width});
      width = options.hidden_width;
      spec.layers.push_back(bn(width));
      spec.layers.push_back({LayerKind::relu, width, width});
      LayerSpec drop{LayerKind::dropout, width, width};
      drop.rate = options.dropout;
      spec.layers.push_back(drop);
    }
  }
  spec.layers.push_back({LayerKind::fully_connected, width, classes});
  spec.validate();
  return spec;
}

template <typename Real>
Sequential<Real> build_head(const NetSpec& spec, Rng& rng) {
  spec.validate();
  Sequential<Real> head;
  for (std::size_t i = 1; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::fully_connected:
        head.add(std::make_unique<FullyConnected<Real>>(l.in, l.out, rng));
        break;
      case LayerKind::batch_norm:
        head.add(std::make_unique<BatchNorm<Real>>(l.out, l.momentum, l.epsilon));
        break;
      case LayerKind::relu:
        head.add(std::make_unique<Relu<Real>>());
        break;
      case LayerKind::dropout:
        head.add(std::make_unique<Dropout<Real>>(l.rate));
        break;
      case LayerKind::probing_block:
        break;
    }
  }
  return head;
}

template Sequential<float> build_head<float>(const NetSpec&, Rng&);
template Sequential<double> build_head<double>(const NetSpec&, Rng&);

}  // namespace fpnn::nn
