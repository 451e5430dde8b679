#include "dlvgen/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlvgen/errors.hpp"

namespace dlvgen {

AdamState AdamState::for_params(std::span<Parameter* const> params) {
  AdamState state;
  for (const auto* p : params) {
    state.m.emplace_back(p->value.shape());
    state.v.emplace_back(p->value.shape());
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamSettings& s) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adam_step: optimizer state holds " + std::to_string(state.m.size()) + " slots for " +
                        std::to_string(params.size()) + " parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = *params[k];
    if (state.m[k].shape() != p.value.shape() || state.v[k].shape() != p.value.shape() ||
        p.grad.shape() != p.value.shape()) {
      throw ContractError("adam_step: state/grad shape mismatch for parameter " + p.name);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(s.beta1, t);
  const double correction2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
  }
}

double global_grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (double g : p->grad.values()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto* p : params) {
      for (auto& g : p->grad.values()) g *= factor;
    }
  }
  return norm;
}

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g(false);
  return loss(g).item();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params, double eps,
                           std::size_t samples_per_param, std::uint64_t seed) {
  for (auto* p : params) p->zero_grad();
  {
    Graph g;
    g.backward(loss(g));
  }
  Rng rng(seed);
  GradCheckResult result;
  for (auto* p : params) {
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (samples_per_param > 0 && samples_per_param < coords.size()) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(samples_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (auto i : coords) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = evaluate(loss);
      p->value[i] = saved - eps;
      const double down = evaluate(loss);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double rel = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      result.max_relative_error = std::max(result.max_relative_error, rel);
      ++result.coordinates_checked;
    }
  }
  return result;
}

}  // namespace dlvgen
