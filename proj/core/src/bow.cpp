#include "dlvgen/bow.hpp"

#include <vector>

#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"

namespace dlvgen::train {

BowHead::BowHead(ParameterStore& store, std::size_t latent_dim, std::size_t vocab, Rng& init, double init_std) {
  Tensor w({2 * latent_dim, vocab});
  for (auto& x : w.values()) x = init_std * init.normal();
  weight_ = &store.add("bow.weight", std::move(w));
  bias_ = &store.add("bow.bias", Tensor({vocab}));
}

Var BowHead::logits(Var z_p, Var z_r) const {
  Graph& g = z_p.graph();
  return add(matmul(concat_cols(z_p, z_r), g.parameter(*weight_)), g.parameter(*bias_));
}

Var bow_loss(const BowHead& head, Var z_p, Var z_r, std::span<const seq::TokenId> response) {
  if (response.empty()) throw ContractError("bow_loss: empty response");
  Var logits = head.logits(z_p, z_r);
  // One copy of the logit row per response token.
  const std::vector<int> rows(response.size(), 0);
  return log_softmax_nll(gather_rows(logits, rows), response);
}

}  // namespace dlvgen::train
