#include "fpnn/trainer/model.hpp"

#include <algorithm>

#include "fpnn/common/error.hpp"

namespace fpnn::trainer {

std::vector<field::ChannelRole> channel_roles(bool normals) {
  using field::ChannelRole;
  if (!normals) return {ChannelRole::distance};
  return {ChannelRole::distance, ChannelRole::normal_x, ChannelRole::normal_y, ChannelRole::normal_z};
}

template <typename Real>
Model<Real>::Model(nn::NetSpec spec, const probing::InitConfig& init, int resolution, Real sigma,
                   std::vector<field::ChannelRole> roles, std::uint64_t head_seed)
    : spec_(std::move(spec)) {
  spec_.validate();
  const auto& p = spec_.layers.front();
  if (p.out != init.filter_count() || p.points != static_cast<std::size_t>(init.points_per_filter) ||
      p.channels != roles.size()) {
    throw ConfigError("network spec does not match the probing configuration");
  }
  bank_ = probing::init_filter_bank<Real>(init, resolution, roles.size());
  probing_ = probing::ProbingLayer<Real>(sigma, std::move(roles));
  Rng rng(head_seed);
  head_ = nn::build_head<Real>(spec_, rng);
}

template <typename Real>
Model<Real> Model<Real>::from_config(const TrainConfig& cfg, std::size_t classes) {
  cfg.validate();
  auto spec = nn::make_net_spec(cfg.architecture, cfg.filters(), static_cast<std::size_t>(cfg.init.points_per_filter),
                                cfg.channels(), classes, cfg.head_options());
  return Model(std::move(spec), cfg.init, cfg.resolution, static_cast<Real>(cfg.effective_sigma()),
               channel_roles(cfg.normals), derive_seed(cfg.sgd.seed, {0x68656164}));
}

template <typename Real>
std::vector<nn::Parameter<Real>> Model<Real>::parameters(bool freeze_probing, bool freeze_head) {
  std::vector<nn::Parameter<Real>> out;
  out.push_back({"probing.locations", &bank_.locations(), nn::ParamKind::exempt, freeze_probing});
  out.push_back({"probing.weights", &bank_.weights(), nn::ParamKind::weight, freeze_probing});
  for (auto p : head_.parameters("head.")) {
    p.frozen = freeze_head;
    out.push_back(std::move(p));
  }
  return out;
}

template <typename Real>
std::vector<Real> Model<Real>::probe(const field::FieldSampler<Real>& sampler,
                                     probing::ProbingCache<Real>& cache) const {
  return probing_.forward(bank_, sampler, cache);
}

template <typename Real>
typename Model<Real>::BatchResult Model<Real>::train_batch(const nn::Tensor<Real>& features,
                                                           std::span<const probing::ProbingCache<Real>> caches,
                                                           const std::vector<int>& labels,
                                                           std::uint64_t dropout_seed, bool skip_probing) {
  if (features.rank() != 2 || features.dim(0) != labels.size() || (!skip_probing && caches.size() != labels.size())) {
    throw ContractError("train_batch: features, caches and labels disagree on batch size");
  }
  head_.reseed(dropout_seed);
  BatchResult r;
  r.logits = head_.forward(features, nn::Mode::train);
  auto loss = nn::softmax_cross_entropy(r.logits, labels);
  r.loss = loss.loss;
  r.correct = loss.correct;
  const nn::Tensor<Real> dx = head_.backward(loss.grad);
  if (!skip_probing) {
    const std::size_t width = dx.dim(1);
    for (std::size_t b = 0; b < labels.size(); ++b) {
      probing_.backward(bank_, caches[b], std::span<const Real>(dx.data() + b * width, width));
    }
  }
  return r;
}

template <typename Real>
nn::Tensor<Real> Model<Real>::logits(const nn::Tensor<Real>& features) {
  return head_.forward(features, nn::Mode::eval);
}

template <typename Real>
nn::Tensor<Real> Model<Real>::tap(const nn::Tensor<Real>& features, std::size_t layer) {
  if (layer >= head_.size()) throw ConfigError("tap layer " + std::to_string(layer) + " out of range");
  return head_.forward_until(features, nn::Mode::eval, layer);
}

template <typename Real>
void Model<Real>::zero_grad() {
  for (auto& p : parameters()) p.tensor->zero_grad();
}

template <typename Real>
nn::Tensor<Real> stack_rows(const std::vector<std::vector<Real>>& rows) {
  if (rows.empty()) throw ContractError("stack_rows: empty batch");
  const std::size_t width = rows.front().size();
  nn::Tensor<Real> t({rows.size(), width});
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].size() != width) throw ContractError("stack_rows: ragged rows");
    std::copy(rows[b].begin(), rows[b].end(), t.data() + b * width);
  }
  return t;
}

template class Model<float>;
template class Model<double>;
template nn::Tensor<float> stack_rows(const std::vector<std::vector<float>>&);
template nn::Tensor<double> stack_rows(const std::vector<std::vector<double>>&);

}  // namespace fpnn::trainer
