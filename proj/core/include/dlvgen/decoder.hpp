#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dlvgen/graph.hpp"
#include "dlvgen/rng.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::seq {

struct DecoderDims {
  std::size_t vocab = 0;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t ff = 256;
  std::size_t max_len = 128;
  std::size_t d_latent = 16;
};

// Pre-norm causal self-attention stack with sinusoidal positions, plus the
// latent projection W_LV: [z_p ; z_r] (2d) -> d_model.
class DecoderModel {
 public:
  DecoderModel(ParameterStore& store, const DecoderDims& dims, Rng& init);

  const DecoderDims& dims() const { return dims_; }
  Parameter& latent_weight() const { return *latent_w_; }  // [2d x e]
  Parameter& latent_bias() const { return *latent_b_; }    // [e]

  // Final-layer hidden states [T x e]. Input at position t is
  // token_emb(t) + pos_enc(t) (+ injection when given). PAD keys are hidden
  // from attention.
  Var hidden_states(Graph& g, std::span<const TokenId> ids, std::optional<Var> injection = std::nullopt) const;

  // Mean of the final hidden states over non-PAD positions (rank 1, length
  // e). Sequences longer than max_len keep their last max_len tokens.
  Var encode_sequence(Graph& g, std::span<const TokenId> ids) const;

  // W_LV [z_p ; z_r] + b_LV, rank 1 of length e.
  Var inject_latent(Var z_p, Var z_r) const;

  // Teacher-forced logits [(|prefix| + 1) x V]: row i scores the response
  // token following BOS + prefix[0..i). The context is truncated from the
  // left when context + 1 + |prefix| exceeds max_len.
  Var forward_logits(Graph& g, std::span<const TokenId> context, std::span<const TokenId> prefix,
                     std::optional<Var> injection = std::nullopt) const;

  // Decoder input ids BOS-joined as used by forward_logits, after truncation.
  std::vector<TokenId> assemble_input(std::span<const TokenId> context, std::span<const TokenId> prefix) const;

 private:
  struct Block {
    Parameter* ln1_gain;
    Parameter* ln1_bias;
    Parameter* qkv_w;  // [e x 3e]
    Parameter* qkv_b;
    Parameter* proj_w;  // [e x e]
    Parameter* proj_b;
    Parameter* ln2_gain;
    Parameter* ln2_bias;
    Parameter* ff1_w;  // [e x ff]
    Parameter* ff1_b;
    Parameter* ff2_w;  // [ff x e]
    Parameter* ff2_b;
  };

  DecoderDims dims_;
  Parameter* token_embed_;
  std::vector<Block> blocks_;
  Parameter* final_gain_;
  Parameter* final_bias_;
  Parameter* out_w_;  // [e x V]
  Parameter* out_b_;
  Parameter* latent_w_;
  Parameter* latent_b_;
  Tensor positions_;  // [max_len x e]
};

}  // namespace dlvgen::seq
