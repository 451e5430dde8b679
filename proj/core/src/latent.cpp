#include "dlvgen/latent.hpp"

#include <cmath>

#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"

namespace dlvgen::latent {

std::string_view kind_name(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::persona_prior: return "persona_prior";
    case NetworkKind::response_prior: return "response_prior";
    case NetworkKind::persona_recognition: return "persona_recognition";
    case NetworkKind::response_recognition: return "response_recognition";
  }
  return "unknown";
}

bool is_recognition(NetworkKind kind) {
  return kind == NetworkKind::persona_recognition || kind == NetworkKind::response_recognition;
}

GaussianParams Gaussian::values() const {
  const auto& m = mu.value().storage();
  const auto& v = log_var.value().storage();
  return {m, v};
}

Gaussian Gaussian::constant(Graph& g, const GaussianParams& params) {
  if (params.mu.size() != params.log_var.size()) {
    throw ContractError("Gaussian: mu has " + std::to_string(params.mu.size()) + " entries, log_var " +
                        std::to_string(params.log_var.size()));
  }
  return {g.constant(Tensor::vector(params.mu)), g.constant(Tensor::vector(params.log_var))};
}

LatentNetwork::LatentNetwork(ParameterStore& store, std::string prefix, NetworkKind kind, std::size_t embed_dim,
                             std::size_t latent_dim, Rng& init, double init_std)
    : kind_(kind),
      input_dim_(is_recognition(kind) ? 2 * embed_dim : embed_dim),
      latent_dim_(latent_dim) {
  Tensor w({2 * latent_dim, input_dim_});
  for (auto& x : w.values()) x = init_std * init.normal();
  weight_ = &store.add(prefix + ".weight", std::move(w));
  bias_ = &store.add(prefix + ".bias", Tensor({2 * latent_dim}));
}

Gaussian gaussian_from_net(const LatentNetwork& net, Var input) {
  if (input.size() != net.input_dim()) {
    throw ContractError(std::string(kind_name(net.kind())) + " network expects input of length " +
                        std::to_string(net.input_dim()) + ", got " + std::to_string(input.size()));
  }
  Graph& g = input.graph();
  const std::size_t d = net.latent_dim();
  Var out = add(matmul_bt(input, g.parameter(net.weight())), g.parameter(net.bias()));
  Var mu = slice_cols(out, 0, d);
  Var log_var = clamp(slice_cols(out, d, d), -kLogVarBound, kLogVarBound);
  return {mu, log_var};
}

Gaussian gaussian_from_net(const LatentNetwork& net, Var context, Var privileged) {
  return gaussian_from_net(net, concat_cols(context, privileged));
}

Var reparameterize(const Gaussian& g, std::span<const double> eps) {
  if (eps.size() != g.dim() || g.log_var.size() != g.dim()) {
    throw ContractError("reparameterize: noise of length " + std::to_string(eps.size()) + " for latent dim " +
                        std::to_string(g.dim()));
  }
  Graph& graph = g.mu.graph();
  Var noise = graph.constant(Tensor::vector({eps.begin(), eps.end()}));
  return add(g.mu, mul(exp(scale(g.log_var, 0.5)), noise));
}

Var reparameterize(const Gaussian& g, Rng& rng) {
  const auto eps = rng.normal_vector(g.dim());
  return reparameterize(g, eps);
}

Var kl_diag_gaussian(const Gaussian& q, const Gaussian& p) {
  if (q.dim() != p.dim() || q.log_var.size() != p.log_var.size() || q.dim() != q.log_var.size()) {
    throw ContractError("kl_diag_gaussian: dimensions " + std::to_string(q.dim()) + " and " +
                        std::to_string(p.dim()) + " differ");
  }
  Var inv_var_p = exp(scale(p.log_var, -1.0));
  Var spread = add(exp(q.log_var), square(sub(q.mu, p.mu)));
  Var per_dim = add_scalar(add(sub(p.log_var, q.log_var), mul(spread, inv_var_p)), -1.0);
  return scale(sum(per_dim), 0.5);
}

double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p) {
  if (q.dim() != p.dim() || q.log_var.size() != q.dim() || p.log_var.size() != p.dim()) {
    throw ContractError("kl_diag_gaussian: dimensions " + std::to_string(q.dim()) + " and " +
                        std::to_string(p.dim()) + " differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double diff = q.mu[i] - p.mu[i];
    total += p.log_var[i] - q.log_var[i] + (std::exp(q.log_var[i]) + diff * diff) * std::exp(-p.log_var[i]) - 1.0;
  }
  return 0.5 * total;
}

Var variance_reg_r(Var log_var, double lambda) { return scale(l2_norm(log_var), lambda); }

Var variance_reg_p(Var log_var, double lambda, PrecisionForm form, double floor) {
  if (form == PrecisionForm::elementwise) {
    return scale(l2_norm(reciprocal(magnitude_floor(log_var, floor))), lambda);
  }
  return scale(reciprocal(magnitude_floor(l2_norm(log_var), floor)), lambda);
}

PrecisionForm parse_precision_form(std::string_view text) {
  if (text == "elementwise") return PrecisionForm::elementwise;
  if (text == "norm_reciprocal") return PrecisionForm::norm_reciprocal;
  throw ParseError("unknown precision form '" + std::string(text) + "' (expected elementwise|norm_reciprocal)");
}

std::string_view precision_form_name(PrecisionForm form) {
  return form == PrecisionForm::elementwise ? "elementwise" : "norm_reciprocal";
}

}  // namespace dlvgen::latent
