#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fpnn/common/rng.hpp"
#include "fpnn/nn/layers.hpp"

namespace fpnn::nn {

enum class LayerKind { probing_block, fully_connected, batch_norm, relu, dropout };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in = 0;   // input width
  std::size_t out = 0;  // output width (probing: filter count C)
  // probing_block
  std::size_t points = 0;
  std::size_t channels = 0;
  // batch_norm
  double momentum = 0.9;
  double epsilon = 1e-5;
  // dropout
  double rate = 0.0;

  std::size_t parameter_count() const noexcept;
};

/// Ordered layer list ending in a softmax cross-entropy over `classes`.
struct NetSpec {
  std::vector<LayerSpec> layers;
  std::size_t classes = 0;

  /// Throws ConfigError unless the first layer is the only probing block,
  /// adjacent widths agree and the last layer is an FC producing `classes`.
  void validate() const;
  std::size_t parameter_count() const noexcept;
  std::string describe() const;
};

enum class Architecture { one_fc, four_fc };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

struct HeadOptions {
  std::size_t hidden_width = 1024;
  double dropout = 0.5;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;
};

/// one_fc:  probing -> BN -> ReLU -> FC(C -> K)
/// four_fc: probing -> BN -> ReLU -> [FC(-> H) -> BN -> ReLU -> Dropout] x 3 -> FC(H -> K)
NetSpec make_net_spec(Architecture arch, std::size_t filters, std::size_t points, std::size_t channels,
                      std::size_t classes, const HeadOptions& options = {});

/// Instantiates every layer after the probing block.
template <typename Real>
Sequential<Real> build_head(const NetSpec& spec, Rng& rng);

}  // namespace fpnn::nn
