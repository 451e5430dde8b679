#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dlvgen/graph.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen {

struct AdamSettings {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment estimates for one parameter list.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  static AdamState for_params(std::span<Parameter* const> params);
};

// One bias-corrected Adam update of every parameter from its grad.
void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamSettings& settings);

double global_grad_norm(std::span<Parameter* const> params);
// Rescales all grads so their joint norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
};

// Compares analytic gradients of `loss` (which must build its graph from the
// given parameters and return a scalar) against central differences
// (f(p + eps) - f(p - eps)) / (2 eps). At most `samples_per_param`
// coordinates per parameter are checked, chosen with `rng`; 0 checks all.
// The relative error of a coordinate is
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
using LossBuilder = std::function<Var(Graph&)>;
GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params, double eps = 1e-4,
                           std::size_t samples_per_param = 0, std::uint64_t seed = 0);

}  // namespace dlvgen
