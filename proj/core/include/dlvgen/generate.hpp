#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlvgen/lexsel.hpp"
#include "dlvgen/model.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen::seq {

// Log-probabilities over the whole vocabulary for the token after `prefix`.
using NextTokenScorer = std::function<std::vector<double>(std::span<const TokenId> prefix)>;

struct BeamSettings {
  std::size_t beam = 3;
  std::size_t max_len = 32;  // generated tokens, EOS included
  TokenId eos = kEos;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // EOS excluded
  double log_prob = 0.0;
  bool finished = false;

  std::size_t length() const { return tokens.size() + (finished ? 1 : 0); }
  // Objective: summed log-probability over length.
  double normalized() const;
};

// Length-normalized beam search. Expansions are ranked by normalized score,
// ties going to the lower token id, then the lower beam index. Search stops
// once `beam` hypotheses have finished or max_len is reached; the best
// finished hypothesis is returned (best unfinished if none finished). For
// beam > 1 the greedy hypothesis is also decoded and wins if it scores
// strictly higher, so widening the beam never loses to greedy decoding.
Hypothesis beam_search(const NextTokenScorer& scorer, const BeamSettings& settings);

// Scorer backed by the decoder for a fixed context and latent injection.
NextTokenScorer decoder_scorer(const DecoderModel& decoder, std::span<const TokenId> context,
                               std::optional<Tensor> injection);

std::vector<TokenId> beam_search(const DecoderModel& decoder, std::span<const TokenId> context,
                                 const std::optional<Tensor>& injection, std::size_t beam = 3,
                                 std::size_t max_len = 32);

}  // namespace dlvgen

namespace dlvgen {

struct Candidate {
  std::string text;
  lex::LexScore score;
};

// Pool of generated responses for one context, with lexical scores and the
// selected index.
struct CandidateSet {
  std::vector<Candidate> candidates;
  std::size_t selected = 0;

  std::vector<std::string> texts() const;
};

struct GenerationSettings {
  std::size_t n = 3;
  std::size_t beam = 3;
  std::size_t max_len = 32;
};

// Draws N latent samples from the prior networks (persona then response noise
// per draw) and beam-decodes one response per draw. The plain variant has no
// latent, so all N candidates are the same decode. Candidates are scored but
// `selected` is left at 0; see select_lexdiv().
CandidateSet generate_candidates(const DialogueModel& model, std::span<const Turn> context,
                                 const GenerationSettings& settings, Rng& rng);

// Scores every candidate and selects the argmax of 0.1 * MTLD + MATTR.
void select_lexdiv(CandidateSet& set, const SelectionConfig& config);

}  // namespace dlvgen
