#include "fpnn/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fpnn::nn {

double GradCheckReport::max_rel_error() const noexcept {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
  return m;
}

std::string GradCheckReport::summary() const {
  std::string out;
  for (const auto& b : blocks) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-28s n=%-6zu max_rel_err=%.3e\n", b.name.c_str(), b.count, b.max_rel_error);
    out += line;
  }
  return out;
}

GradCheckReport grad_check(const std::function<double()>& loss, std::vector<GradBlock>& blocks, double rel_step) {
  GradCheckReport report;
  for (auto& block : blocks) {
    double sq = 0.0, max_abs = 0.0;
    for (double v : block.values) sq += v * v;
    for (double a : block.analytic) max_abs = std::max(max_abs, std::abs(a));
    const double rms = block.values.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(block.values.size()));
    const double h = rel_step * std::max(rms, 1e-3);
    const double floor = std::max(1e-3 * max_abs, 1e-12);

    BlockReport br{block.name, block.values.size(), 0.0};
    for (std::size_t i = 0; i < block.values.size(); ++i) {
      const double saved = block.values[i];
      const auto at = [&](double offset) {
        block.values[i] = saved + offset;
        return loss();
      };
      const double f1 = at(h), b1 = at(-h), f2 = at(2.0 * h), b2 = at(-2.0 * h);
      block.values[i] = saved;
      const double numeric = (8.0 * (f1 - b1) - (f2 - b2)) / (12.0 * h);
      const double a = block.analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      br.max_rel_error = std::max(br.max_rel_error, std::abs(a - numeric) / denom);
    }
    report.blocks.push_back(std::move(br));
  }
  return report;
}

GradCheckReport check_layer(Layer<double>& layer, const Tensor<double>& input, Mode mode, Rng& rng,
                            double rel_step) {
  Tensor<double> x = input;
  Tensor<double> probe = layer.forward(x, mode);
  Tensor<double> r(probe.shape());
  for (double& v : r.values()) v = uniform(rng, -1.0, 1.0);

  auto params = layer.parameters();
  for (auto& p : params) p.tensor->zero_grad();
  layer.forward(x, mode);
  const Tensor<double> dx = layer.backward(r);

  std::vector<GradBlock> blocks;
  blocks.push_back({"input", x.values(), std::vector<double>(dx.values().begin(), dx.values().end())});
  for (auto& p : params) {
    if (!p.trainable()) continue;
    blocks.push_back({p.name, p.tensor->values(),
                      std::vector<double>(p.tensor->grad().begin(), p.tensor->grad().end())});
  }
  const auto loss = [&]() {
    const Tensor<double> y = layer.forward(x, mode);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
    return s;
  };
  return grad_check(loss, blocks, rel_step);
}

}  // namespace fpnn::nn
