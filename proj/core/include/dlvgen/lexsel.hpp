#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlvgen/config.hpp"

namespace dlvgen::lex {

inline constexpr double kDefaultThreshold = 0.72;
inline constexpr std::size_t kDefaultWindow = 4;
// Weight of MTLD in the combined selection score.
inline constexpr double kMtldWeight = 0.1;
// Combined scores closer than this are treated as equal by select_response.
inline constexpr double kTieTolerance = 1e-12;

using Tokens = std::span<const std::string>;

// Distinct tokens over total tokens.
double ttr(Tokens tokens);

// One MTLD pass in reading order.
double mtld_directional(Tokens tokens, double h = kDefaultThreshold, MtldMode mode = MtldMode::standard);
// Mean of the forward and backward passes.
double mtld(Tokens tokens, double h = kDefaultThreshold, MtldMode mode = MtldMode::standard);
// Mean TTR over all stride-1 windows of length w; the whole sequence's TTR
// when it is shorter than w.
double mattr(Tokens tokens, std::size_t w = kDefaultWindow);

struct LexScore {
  double mtld = 0.0;
  double mattr = 0.0;
  double combined = 0.0;  // 0.1 * mtld + mattr
};

LexScore score(Tokens tokens, double h = kDefaultThreshold, std::size_t w = kDefaultWindow,
               MtldMode mode = MtldMode::standard);

struct Selection {
  std::size_t index = 0;
  std::vector<LexScore> scores;
};

// Re-tokenizes each candidate text and returns the argmax of the combined
// score, lowest index on ties (within kTieTolerance). A candidate with no tokens scores 0 on every
// measure. Throws ContractError on an empty pool.
Selection select_response(std::span<const std::string> candidates, double h = kDefaultThreshold,
                          std::size_t w = kDefaultWindow, MtldMode mode = MtldMode::standard);

// Per-response distinct n-grams over n-grams, averaged over responses with
// at least n tokens; empty when no response qualifies.
std::optional<double> distinct_n(std::span<const std::vector<std::string>> responses, std::size_t n);

}  // namespace dlvgen::lex
