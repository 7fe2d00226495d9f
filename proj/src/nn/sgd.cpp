#include "fpnn/nn/sgd.hpp"

#include "fpnn/simd/kernels.hpp"

namespace fpnn::nn {

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

template <typename Real>
Sgd<Real>::Sgd(const SgdConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
}

template <typename Real>
void Sgd<Real>::step(const std::vector<Parameter<Real>>& params) {
  for (const auto& p : params) {
    if (!p.trainable()) continue;
    auto& v = velocities_[p.name];
    if (v.size() != p.tensor->size()) v.assign(p.tensor->size(), Real{0});
    const Real decay = p.kind == ParamKind::weight ? static_cast<Real>(cfg_.weight_decay) : Real{0};
    simd::sgd_update(p.tensor->values().data(), p.tensor->grad().data(), v.data(), v.size(),
                     static_cast<Real>(cfg_.learning_rate), static_cast<Real>(cfg_.momentum), decay);
  }
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace fpnn::nn
