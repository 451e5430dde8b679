#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlvgen/graph.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen::latent {

// Bound applied to every log-variance produced by a network.
inline constexpr double kLogVarBound = 20.0;

enum class NetworkKind { persona_prior, response_prior, persona_recognition, response_recognition };

std::string_view kind_name(NetworkKind kind);
bool is_recognition(NetworkKind kind);

// Diagonal Gaussian N(mu, diag(exp(log_var))) as plain numbers.
struct GaussianParams {
  std::vector<double> mu;
  std::vector<double> log_var;

  std::size_t dim() const { return mu.size(); }
};

// Diagonal Gaussian whose parameters live in a graph.
struct Gaussian {
  Var mu;
  Var log_var;

  std::size_t dim() const { return mu.size(); }
  GaussianParams values() const;
  static Gaussian constant(Graph& g, const GaussianParams& params);
};

// Single affine layer mapping a sequence embedding (priors) or the
// concatenation of two embeddings (recognitions) to [mu ; log_var].
class LatentNetwork {
 public:
  LatentNetwork(ParameterStore& store, std::string prefix, NetworkKind kind, std::size_t embed_dim,
                std::size_t latent_dim, Rng& init, double init_std = 0.02);

  NetworkKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t latent_dim() const { return latent_dim_; }
  Parameter& weight() const { return *weight_; }  // [2d x in]
  Parameter& bias() const { return *bias_; }      // [2d]

 private:
  NetworkKind kind_;
  std::size_t input_dim_;
  std::size_t latent_dim_;
  Parameter* weight_;
  Parameter* bias_;
};

// W * input + b, split into mu (first d) and log_var (last d, clamped to
// [-20, 20]). Recognition inputs are [x ; p] or [x ; y] in that order.
Gaussian gaussian_from_net(const LatentNetwork& net, Var input);
Gaussian gaussian_from_net(const LatentNetwork& net, Var context, Var privileged);

// z = mu + exp(log_var / 2) * eps, with eps supplied by the caller.
Var reparameterize(const Gaussian& g, std::span<const double> eps);
Var reparameterize(const Gaussian& g, Rng& rng);

// KL(q || p) for diagonal Gaussians:
// 1/2 sum_i [lv_p - lv_q + (exp(lv_q) + (mu_q - mu_p)^2) / exp(lv_p) - 1].
Var kl_diag_gaussian(const Gaussian& q, const Gaussian& p);
double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p);

// lambda * ||log_var||.
Var variance_reg_r(Var log_var, double lambda);

enum class PrecisionForm {
  elementwise,      // lambda * || 1 / log_var ||, reciprocal taken per entry
  norm_reciprocal,  // lambda / || log_var ||
};

// Precision penalty on the persona prior's log-variance. Entries (or, for
// norm_reciprocal, the norm) are raised to magnitude >= floor keeping their
// sign before inverting, so log_var = 0 saturates at 1 / floor.
Var variance_reg_p(Var log_var, double lambda, PrecisionForm form = PrecisionForm::elementwise,
                   double floor = 1e-3);

PrecisionForm parse_precision_form(std::string_view text);
std::string_view precision_form_name(PrecisionForm form);

}  // namespace dlvgen::latent
