#include "dlvgen/decoder.hpp"

#include <cmath>
#include <string>

#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"

namespace dlvgen::seq {
namespace {

Tensor normal_init(Shape shape, double std, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& x : t.values()) x = std * rng.normal();
  return t;
}

Tensor sinusoidal_positions(std::size_t max_len, std::size_t dim) {
  Tensor t({max_len, dim});
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(dim));
      t.at(pos, i) = std::sin(static_cast<double>(pos) * freq);
      if (i + 1 < dim) t.at(pos, i + 1) = std::cos(static_cast<double>(pos) * freq);
    }
  }
  return t;
}

}  // namespace

DecoderModel::DecoderModel(ParameterStore& store, const DecoderDims& dims, Rng& init) : dims_(dims) {
  const std::size_t e = dims.d_model;
  if (dims.vocab == 0) throw ContractError("decoder needs a nonempty vocabulary");
  if (dims.heads == 0 || e % dims.heads != 0) {
    throw ContractError("d_model " + std::to_string(e) + " is not divisible by heads " + std::to_string(dims.heads));
  }
  constexpr double kStd = 0.02;
  const double residual_std = kStd / std::sqrt(2.0 * static_cast<double>(dims.layers));

  token_embed_ = &store.add("decoder.token_embed", normal_init({dims.vocab, e}, kStd, init));
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::string p = "decoder.block" + std::to_string(l) + ".";
    Block b{};
    b.ln1_gain = &store.add(p + "ln1.gain", Tensor({e}, 1.0));
    b.ln1_bias = &store.add(p + "ln1.bias", Tensor({e}));
    b.qkv_w = &store.add(p + "attn.qkv.weight", normal_init({e, 3 * e}, kStd, init));
    b.qkv_b = &store.add(p + "attn.qkv.bias", Tensor({3 * e}));
    b.proj_w = &store.add(p + "attn.proj.weight", normal_init({e, e}, residual_std, init));
    b.proj_b = &store.add(p + "attn.proj.bias", Tensor({e}));
    b.ln2_gain = &store.add(p + "ln2.gain", Tensor({e}, 1.0));
    b.ln2_bias = &store.add(p + "ln2.bias", Tensor({e}));
    b.ff1_w = &store.add(p + "ff.in.weight", normal_init({e, dims.ff}, kStd, init));
    b.ff1_b = &store.add(p + "ff.in.bias", Tensor({dims.ff}));
    b.ff2_w = &store.add(p + "ff.out.weight", normal_init({dims.ff, e}, residual_std, init));
    b.ff2_b = &store.add(p + "ff.out.bias", Tensor({e}));
    blocks_.push_back(b);
  }
  final_gain_ = &store.add("decoder.final_ln.gain", Tensor({e}, 1.0));
  final_bias_ = &store.add("decoder.final_ln.bias", Tensor({e}));
  out_w_ = &store.add("decoder.output.weight", normal_init({e, dims.vocab}, kStd, init));
  out_b_ = &store.add("decoder.output.bias", Tensor({dims.vocab}));
  latent_w_ = &store.add("decoder.latent_proj.weight", normal_init({2 * dims.d_latent, e}, kStd, init));
  latent_b_ = &store.add("decoder.latent_proj.bias", Tensor({e}));
  positions_ = sinusoidal_positions(dims.max_len, e);
}

Var DecoderModel::hidden_states(Graph& g, std::span<const TokenId> ids, std::optional<Var> injection) const {
  const std::size_t T = ids.size();
  const std::size_t e = dims_.d_model;
  if (T == 0) throw ContractError("hidden_states: empty token sequence");
  if (T > dims_.max_len) {
    throw ContractError("hidden_states: " + std::to_string(T) + " tokens exceed max_len " +
                        std::to_string(dims_.max_len));
  }
  if (injection && injection->size() != e) {
    throw DimensionError("latent injection has length " + std::to_string(injection->size()) + ", expected " +
                         std::to_string(e));
  }

  std::vector<char> key_valid(T);
  for (std::size_t t = 0; t < T; ++t) key_valid[t] = ids[t] != kPad;

  Tensor pos({T, e});
  std::copy_n(positions_.data(), T * e, pos.data());
  Var x = add(gather_rows(g.parameter(*token_embed_), ids), g.constant(std::move(pos)));
  if (injection) x = add(x, *injection);

  const std::size_t heads = dims_.heads;
  const std::size_t dh = e / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (const auto& b : blocks_) {
    Var h = layer_norm(x, g.parameter(*b.ln1_gain), g.parameter(*b.ln1_bias));
    Var qkv = add(matmul(h, g.parameter(*b.qkv_w)), g.parameter(*b.qkv_b));
    std::vector<Var> outs;
    outs.reserve(heads);
    for (std::size_t k = 0; k < heads; ++k) {
      Var q = slice_cols(qkv, k * dh, dh);
      Var key = slice_cols(qkv, e + k * dh, dh);
      Var val = slice_cols(qkv, 2 * e + k * dh, dh);
      Var att = softmax_rows(scale(matmul_bt(q, key), inv_sqrt), true, key_valid);
      outs.push_back(matmul(att, val));
    }
    Var merged = heads == 1 ? outs[0] : concat_cols(outs);
    x = add(x, add(matmul(merged, g.parameter(*b.proj_w)), g.parameter(*b.proj_b)));
    Var h2 = layer_norm(x, g.parameter(*b.ln2_gain), g.parameter(*b.ln2_bias));
    Var f = gelu(add(matmul(h2, g.parameter(*b.ff1_w)), g.parameter(*b.ff1_b)));
    x = add(x, add(matmul(f, g.parameter(*b.ff2_w)), g.parameter(*b.ff2_b)));
  }
  return layer_norm(x, g.parameter(*final_gain_), g.parameter(*final_bias_));
}

Var DecoderModel::encode_sequence(Graph& g, std::span<const TokenId> ids) const {
  if (ids.empty()) throw ContractError("encode_sequence: empty token sequence");
  if (ids.size() > dims_.max_len) ids = ids.subspan(ids.size() - dims_.max_len);
  Var h = hidden_states(g, ids);
  std::vector<char> valid(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) valid[t] = ids[t] != kPad;
  return mean_rows(h, valid);
}

Var DecoderModel::inject_latent(Var z_p, Var z_r) const {
  if (z_p.size() != dims_.d_latent || z_r.size() != dims_.d_latent) {
    throw ContractError("inject_latent: latent lengths " + std::to_string(z_p.size()) + " and " +
                        std::to_string(z_r.size()) + ", expected " + std::to_string(dims_.d_latent));
  }
  Graph& g = z_p.graph();
  return add(matmul(concat_cols(z_p, z_r), g.parameter(*latent_w_)), g.parameter(*latent_b_));
}

std::vector<TokenId> DecoderModel::assemble_input(std::span<const TokenId> context,
                                                  std::span<const TokenId> prefix) const {
  if (prefix.size() + 1 > dims_.max_len) {
    throw ContractError("response prefix of " + std::to_string(prefix.size()) + " tokens exceeds max_len " +
                        std::to_string(dims_.max_len));
  }
  const std::size_t room = dims_.max_len - prefix.size() - 1;
  if (context.size() > room) context = context.subspan(context.size() - room);
  std::vector<TokenId> ids;
  ids.reserve(context.size() + 1 + prefix.size());
  ids.insert(ids.end(), context.begin(), context.end());
  ids.push_back(kBos);
  ids.insert(ids.end(), prefix.begin(), prefix.end());
  return ids;
}

Var DecoderModel::forward_logits(Graph& g, std::span<const TokenId> context, std::span<const TokenId> prefix,
                                 std::optional<Var> injection) const {
  const auto ids = assemble_input(context, prefix);
  const std::size_t response_rows = prefix.size() + 1;
  Var h = hidden_states(g, ids, injection);
  Var tail = slice_rows(h, ids.size() - response_rows, response_rows);
  return add(matmul(tail, g.parameter(*out_w_)), g.parameter(*out_b_));
}

}  // namespace dlvgen::seq
