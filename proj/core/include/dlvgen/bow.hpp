#pragma once

#include <span>

#include "dlvgen/graph.hpp"
#include "dlvgen/rng.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::train {

// Predicts the response's bag of words from [z_p ; z_r].
class BowHead {
 public:
  BowHead(ParameterStore& store, std::size_t latent_dim, std::size_t vocab, Rng& init, double init_std = 0.02);

  Parameter& weight() const { return *weight_; }  // [2d x V]
  Parameter& bias() const { return *bias_; }      // [V]

  // Logits over the vocabulary, rank 1 of length V.
  Var logits(Var z_p, Var z_r) const;

 private:
  Parameter* weight_;
  Parameter* bias_;
};

// Mean over response tokens of -log softmax(head([z_p ; z_r]))[token].
// Repeated tokens count once per occurrence. Throws ContractError on an empty
// response.
Var bow_loss(const BowHead& head, Var z_p, Var z_r, std::span<const seq::TokenId> response);

}  // namespace dlvgen::train
