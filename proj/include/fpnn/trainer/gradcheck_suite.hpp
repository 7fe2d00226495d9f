#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fpnn::trainer {

struct GradCheckCase {
  std::string name;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return max_rel_error <= tolerance; }
};

/// sensor, gaussian, dotproduct, probing, fc, batchnorm, relu, dropout,
/// softmax, network.
const std::vector<std::string>& gradcheck_names();

/// Finite-difference check of one backward pass over `instances` random
/// double-precision instances. Isolated layers use tolerance 1e-5; the
/// probing composition and the 1-FC network use 1e-4. Fields are random
/// members of the trilinear family, for which the sampled gradient field
/// equals the derivative of the interpolant.
GradCheckCase run_gradcheck(const std::string& name, std::size_t instances = 100, std::uint64_t seed = 1);

}  // namespace fpnn::trainer
