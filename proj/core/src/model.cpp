#include "dlvgen/model.hpp"

#include "dlvgen/errors.hpp"

namespace dlvgen {

DialogueModel::DialogueModel(const ModelConfig& config, seq::Vocab vocab, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), params_(std::make_unique<ParameterStore>()) {
  Rng init(derive_seed(seed, 0x1417));
  seq::DecoderDims dims;
  dims.vocab = vocab_.size();
  dims.d_model = config.d_model;
  dims.layers = config.layers;
  dims.heads = config.heads;
  dims.ff = config.ff_dim();
  dims.max_len = config.max_len;
  dims.d_latent = config.d_latent;
  decoder_ = std::make_unique<seq::DecoderModel>(*params_, dims, init);
  using latent::LatentNetwork;
  using latent::NetworkKind;
  const auto e = config.d_model;
  const auto d = config.d_latent;
  persona_prior_ = std::make_unique<LatentNetwork>(*params_, "persona_prior", NetworkKind::persona_prior, e, d, init);
  response_prior_ =
      std::make_unique<LatentNetwork>(*params_, "response_prior", NetworkKind::response_prior, e, d, init);
  persona_recognition_ = std::make_unique<LatentNetwork>(*params_, "persona_recognition",
                                                         NetworkKind::persona_recognition, e, d, init);
  response_recognition_ = std::make_unique<LatentNetwork>(*params_, "response_recognition",
                                                          NetworkKind::response_recognition, e, d, init);
  bow_ = std::make_unique<train::BowHead>(*params_, d, vocab_.size(), init);
}

DialogueModel DialogueModel::from_checkpoint(const Checkpoint& ckpt) {
  const auto cfg = Config::parse(ckpt.config_text);
  DialogueModel model(cfg.model, seq::Vocab(ckpt.vocabulary), ckpt.seed);
  import_parameters(ckpt, model.params());
  return model;
}

DialogueModel DialogueModel::load(const std::filesystem::path& path) { return from_checkpoint(read_checkpoint(path)); }

Checkpoint DialogueModel::to_checkpoint(const Config& run_config) const {
  Checkpoint ckpt;
  Config echo = run_config;
  echo.model = config_;
  ckpt.seed = run_config.seed;
  ckpt.config_text = echo.to_text();
  ckpt.vocabulary = vocab_.regular_tokens();
  export_parameters(*params_, ckpt);
  return ckpt;
}

EncodedExample DialogueModel::encode(const DialogueExample& example) const {
  if (example.context.empty()) throw ContractError("dialogue example has an empty context");
  EncodedExample out;
  auto view = seq::make_context_view(vocab_, example.context);
  out.context = std::move(view.full);
  out.persona_view = std::move(view.persona_view);
  for (const auto& s : example.persona.statements) {
    const auto ids = vocab_.encode(s);
    out.persona.insert(out.persona.end(), ids.begin(), ids.end());
  }
  // A persona without statements still needs a token to embed.
  if (out.persona.empty()) out.persona.push_back(seq::kSepAgent);
  out.response = vocab_.encode(example.response);
  if (out.response.size() + 1 > config_.max_len) out.response.resize(config_.max_len - 1);
  return out;
}

DialogueModel::Priors DialogueModel::priors(Graph& g, const seq::ContextView& view) const {
  Priors out;
  if (variant() == Variant::plain) return out;
  Var context = decoder_->encode_sequence(g, view.full);
  out.response = latent::gaussian_from_net(*response_prior_, context);
  if (variant() == Variant::dlvgen) {
    Var persona_view = decoder_->encode_sequence(g, view.persona_view);
    out.persona = latent::gaussian_from_net(*persona_prior_, persona_view);
  }
  return out;
}

}  // namespace dlvgen
