#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "dlvgen/bow.hpp"
#include "dlvgen/checkpoint.hpp"
#include "dlvgen/config.hpp"
#include "dlvgen/context.hpp"
#include "dlvgen/decoder.hpp"
#include "dlvgen/latent.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen {

// Token-level form of a DialogueExample, prepared once per corpus.
struct EncodedExample {
  std::vector<seq::TokenId> context;       // full context, speaker-tagged
  std::vector<seq::TokenId> persona_view;  // agent turns only
  std::vector<seq::TokenId> persona;       // persona statements
  std::vector<seq::TokenId> response;      // without BOS/EOS
};

// Decoder, the four latent networks and the BoW head over one parameter
// store. Every variant owns the full parameter set (so one seed initializes
// shared parts identically); the variant decides which parts are used.
class DialogueModel {
 public:
  DialogueModel(const ModelConfig& config, seq::Vocab vocab, std::uint64_t seed);

  static DialogueModel from_checkpoint(const Checkpoint& ckpt);
  static DialogueModel load(const std::filesystem::path& path);
  Checkpoint to_checkpoint(const Config& run_config) const;

  const ModelConfig& config() const { return config_; }
  Variant variant() const { return config_.variant; }
  const seq::Vocab& vocab() const { return vocab_; }
  ParameterStore& params() { return *params_; }
  const ParameterStore& params() const { return *params_; }

  const seq::DecoderModel& decoder() const { return *decoder_; }
  const latent::LatentNetwork& persona_prior() const { return *persona_prior_; }
  const latent::LatentNetwork& response_prior() const { return *response_prior_; }
  const latent::LatentNetwork& persona_recognition() const { return *persona_recognition_; }
  const latent::LatentNetwork& response_recognition() const { return *response_recognition_; }
  const train::BowHead& bow() const { return *bow_; }

  EncodedExample encode(const DialogueExample& example) const;

  struct Priors {
    std::optional<latent::Gaussian> persona;   // dlvgen only
    std::optional<latent::Gaussian> response;  // cvae and dlvgen
  };
  // Prior networks evaluated on a context; empty members for unused latents.
  Priors priors(Graph& g, const seq::ContextView& view) const;

 private:
  ModelConfig config_;
  seq::Vocab vocab_;
  std::unique_ptr<ParameterStore> params_;
  std::unique_ptr<seq::DecoderModel> decoder_;
  std::unique_ptr<latent::LatentNetwork> persona_prior_;
  std::unique_ptr<latent::LatentNetwork> response_prior_;
  std::unique_ptr<latent::LatentNetwork> persona_recognition_;
  std::unique_ptr<latent::LatentNetwork> response_recognition_;
  std::unique_ptr<train::BowHead> bow_;
};

}  // namespace dlvgen
