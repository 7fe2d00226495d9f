#include "fpnn/nn/layers.hpp"

#include <cmath>

#include "fpnn/simd/kernels.hpp"

namespace fpnn::nn {

namespace {

template <typename Real>
void require_matrix(const Tensor<Real>& x, std::size_t features, const char* who) {
  if (x.rank() != 2 || x.dim(1) != features) {
    throw ContractError(std::string(who) + ": expected batch x " + std::to_string(features) + ", got " +
                        x.shape_string());
  }
}

}  // namespace

// ---- FullyConnected ----

template <typename Real>
FullyConnected<Real>::FullyConnected(std::size_t in, std::size_t out, Rng& rng)
    : weight_({out, in}), bias_({out}) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Real& w : weight_.values()) w = static_cast<Real>(uniform(rng, -bound, bound));
}

template <typename Real>
Tensor<Real> FullyConnected<Real>::forward(const Tensor<Real>& x, Mode) {
  const std::size_t in = in_features(), out = out_features();
  require_matrix(x, in, "fc forward");
  input_ = x;
  const std::size_t batch = x.dim(0);
  Tensor<Real> y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* xb = x.data() + b * in;
    for (std::size_t o = 0; o < out; ++o) y(b, o) = simd::dot(weight_.data() + o * in, xb, in) + bias_[o];
  }
  return y;
}

template <typename Real>
Tensor<Real> FullyConnected<Real>::backward(const Tensor<Real>& dy) {
  const std::size_t in = in_features(), out = out_features();
  require_matrix(dy, out, "fc backward");
  if (input_.empty() || input_.dim(0) != dy.dim(0)) throw ContractError("fc backward without matching forward");
  const std::size_t batch = dy.dim(0);
  Tensor<Real> dx({batch, in});
  Real* wgrad = weight_.grad().data();
  auto bgrad = bias_.grad();
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* xb = input_.data() + b * in;
    Real* dxb = dx.data() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const Real g = dy(b, o);
      if (g == 0) continue;
      simd::axpy(g, weight_.data() + o * in, dxb, in);
      simd::axpy(g, xb, wgrad + o * in, in);
      bgrad[o] += g;
    }
  }
  return dx;
}

template <typename Real>
std::vector<Parameter<Real>> FullyConnected<Real>::parameters() {
  return {{"weight", &weight_, ParamKind::weight}, {"bias", &bias_, ParamKind::exempt}};
}

// ---- BatchNorm ----

template <typename Real>
BatchNorm<Real>::BatchNorm(std::size_t features, double momentum, double epsilon)
    : momentum_(static_cast<Real>(momentum)),
      epsilon_(static_cast<Real>(epsilon)),
      gamma_({features}),
      beta_({features}),
      running_mean_({features}),
      running_var_({features}) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("batch norm momentum must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("batch norm epsilon must be positive");
  for (Real& g : gamma_.values()) g = 1;
  for (Real& v : running_var_.values()) v = 1;
}

template <typename Real>
Tensor<Real> BatchNorm<Real>::forward(const Tensor<Real>& x, Mode mode) {
  const std::size_t f_count = gamma_.size();
  require_matrix(x, f_count, "batch norm forward");
  const std::size_t batch = x.dim(0);
  mode_ = mode;
  xhat_ = Tensor<Real>({batch, f_count});
  inv_std_.assign(f_count, Real{0});
  Tensor<Real> y({batch, f_count});

  for (std::size_t f = 0; f < f_count; ++f) {
    Real mean = 0, var = 0;
    if (mode == Mode::train) {
      if (batch < 2) throw ContractError("batch norm needs batch >= 2 in train mode");
      for (std::size_t b = 0; b < batch; ++b) mean += x(b, f);
      mean /= static_cast<Real>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const Real d = x(b, f) - mean;
        var += d * d;
      }
      var /= static_cast<Real>(batch);
      const Real unbiased = var * static_cast<Real>(batch) / static_cast<Real>(batch - 1);
      running_mean_[f] = momentum_ * running_mean_[f] + (1 - momentum_) * mean;
      running_var_[f] = momentum_ * running_var_[f] + (1 - momentum_) * unbiased;
    } else {
      mean = running_mean_[f];
      var = running_var_[f];
    }
    const Real inv = 1 / std::sqrt(var + epsilon_);
    inv_std_[f] = inv;
    for (std::size_t b = 0; b < batch; ++b) {
      const Real xh = (x(b, f) - mean) * inv;
      xhat_(b, f) = xh;
      y(b, f) = gamma_[f] * xh + beta_[f];
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> BatchNorm<Real>::backward(const Tensor<Real>& dy) {
  const std::size_t f_count = gamma_.size();
  require_matrix(dy, f_count, "batch norm backward");
  if (xhat_.empty() || xhat_.dim(0) != dy.dim(0)) throw ContractError("batch norm backward without matching forward");
  const std::size_t batch = dy.dim(0);
  Tensor<Real> dx({batch, f_count});
  auto ggrad = gamma_.grad();
  auto bgrad = beta_.grad();
  for (std::size_t f = 0; f < f_count; ++f) {
    Real sum_dy = 0, sum_dy_xhat = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      sum_dy += dy(b, f);
      sum_dy_xhat += dy(b, f) * xhat_(b, f);
    }
    ggrad[f] += sum_dy_xhat;
    bgrad[f] += sum_dy;
    const Real scale = gamma_[f] * inv_std_[f];
    if (mode_ == Mode::eval) {
      for (std::size_t b = 0; b < batch; ++b) dx(b, f) = dy(b, f) * scale;
      continue;
    }
    const Real n = static_cast<Real>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      dx(b, f) = scale / n * (n * dy(b, f) - sum_dy - xhat_(b, f) * sum_dy_xhat);
    }
  }
  return dx;
}

template <typename Real>
std::vector<Parameter<Real>> BatchNorm<Real>::parameters() {
  return {{"gamma", &gamma_, ParamKind::exempt},
          {"beta", &beta_, ParamKind::exempt},
          {"running_mean", &running_mean_, ParamKind::buffer},
          {"running_var", &running_var_, ParamKind::buffer}};
}

// ---- Relu ----

template <typename Real>
Tensor<Real> Relu<Real>::forward(const Tensor<Real>& x, Mode) {
  Tensor<Real> y(x.shape());
  mask_.assign(x.size(), 0);
  shape_ = x.shape();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0) {
      y[i] = x[i];
      mask_[i] = 1;
    }
  }
  return y;
}

template <typename Real>
Tensor<Real> Relu<Real>::backward(const Tensor<Real>& dy) {
  if (dy.shape() != shape_) throw ContractError("relu backward without matching forward");
  Tensor<Real> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask_[i] ? dy[i] : Real{0};
  return dx;
}

// ---- Dropout ----

template <typename Real>
Dropout<Real>::Dropout(double rate, std::uint64_t seed) : rate_(rate), seed_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

template <typename Real>
Tensor<Real> Dropout<Real>::forward(const Tensor<Real>& x, Mode mode) {
  if (mode == Mode::eval || rate_ == 0.0) {
    scale_.clear();
    return x;
  }
  Rng rng(seed_);
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate_));
  scale_.resize(x.size());
  Tensor<Real> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale_[i] = uniform(rng, 0.0, 1.0) < rate_ ? Real{0} : keep_scale;
    y[i] = x[i] * scale_[i];
  }
  return y;
}

template <typename Real>
Tensor<Real> Dropout<Real>::backward(const Tensor<Real>& dy) {
  if (scale_.empty()) return dy;
  if (scale_.size() != dy.size()) throw ContractError("dropout backward without matching forward");
  Tensor<Real> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * scale_[i];
  return dx;
}

// ---- Sequential ----

template <typename Real>
Tensor<Real> Sequential<Real>::forward(const Tensor<Real>& x, Mode mode) {
  if (layers_.empty()) return x;
  return forward_until(x, mode, layers_.size() - 1);
}

template <typename Real>
Tensor<Real> Sequential<Real>::forward_until(const Tensor<Real>& x, Mode mode, std::size_t tap) {
  Tensor<Real> h = x;
  for (std::size_t i = 0; i <= tap && i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

template <typename Real>
Tensor<Real> Sequential<Real>::backward(const Tensor<Real>& dy) {
  Tensor<Real> g = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename Real>
std::vector<Parameter<Real>> Sequential<Real>::parameters(const std::string& prefix) {
  std::vector<Parameter<Real>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto p : layers_[i]->parameters()) {
      p.name = prefix + std::to_string(i) + "." + layers_[i]->kind() + "." + p.name;
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename Real>
void Sequential<Real>::reseed(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->reseed(derive_seed(seed, {i}));
}

// ---- loss ----

template <typename Real>
LossResult<Real> softmax_cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ContractError("softmax cross-entropy: logits " + logits.shape_string() + " vs " +
                        std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  LossResult<Real> r;
  r.grad = Tensor<Real>({batch, k});
  double total = 0.0;
  std::vector<double> p(k);
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ContractError("label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    }
    const Real* row = logits.data() + b * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(static_cast<double>(row[j]) - mx);
      sum += p[j];
    }
    total += std::log(sum) - (static_cast<double>(row[label]) - mx);
    for (std::size_t j = 0; j < k; ++j) {
      const double onehot = static_cast<std::size_t>(label) == j ? 1.0 : 0.0;
      r.grad(b, j) = static_cast<Real>((p[j] / sum - onehot) / static_cast<double>(batch));
    }
    if (argmax(std::span<const Real>(row, k)) == static_cast<std::size_t>(label)) ++r.correct;
  }
  r.loss = total / static_cast<double>(batch);
  return r;
}

#define FPNN_INSTANTIATE(Real)                   \
  template class FullyConnected<Real>;           \
  template class BatchNorm<Real>;                \
  template class Relu<Real>;                     \
  template class Dropout<Real>;                  \
  template class Sequential<Real>;               \
  template LossResult<Real> softmax_cross_entropy(const Tensor<Real>&, const std::vector<int>&);

FPNN_INSTANTIATE(float)
FPNN_INSTANTIATE(double)
#undef FPNN_INSTANTIATE

}  // namespace fpnn::nn
