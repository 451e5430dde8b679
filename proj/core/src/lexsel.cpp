#include "dlvgen/lexsel.hpp"

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dlvgen/errors.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::lex {
namespace {

void require_nonempty(Tokens tokens, const char* what) {
  if (tokens.empty()) throw ContractError(std::string(what) + ": empty token sequence");
}

}  // namespace

double ttr(Tokens tokens) {
  require_nonempty(tokens, "ttr");
  const std::unordered_set<std::string> types(tokens.begin(), tokens.end());
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

double mtld_directional(Tokens tokens, double h, MtldMode mode) {
  require_nonempty(tokens, "mtld");
  double factors = 0.0;
  std::unordered_set<std::string> types;
  std::size_t segment = 0;
  for (const auto& tok : tokens) {
    types.insert(tok);
    ++segment;
    const double segment_ttr = static_cast<double>(types.size()) / static_cast<double>(segment);
    if (segment_ttr < h) {
      factors += 1.0;
      types.clear();
      segment = 0;
    }
  }
  if (segment > 0 && mode == MtldMode::standard) {
    const double rest_ttr = static_cast<double>(types.size()) / static_cast<double>(segment);
    factors += (1.0 - rest_ttr) / (1.0 - h);
  }
  const double total = static_cast<double>(tokens.size());
  // No completed factor and no partial: the sequence never lost diversity.
  if (factors == 0.0) return total;
  return total / factors;
}

double mtld(Tokens tokens, double h, MtldMode mode) {
  require_nonempty(tokens, "mtld");
  const std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  return 0.5 * (mtld_directional(tokens, h, mode) + mtld_directional(reversed, h, mode));
}

double mattr(Tokens tokens, std::size_t w) {
  require_nonempty(tokens, "mattr");
  if (w == 0) throw ContractError("mattr: window must be positive");
  if (tokens.size() < w) return ttr(tokens);
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < w; ++i) ++counts[tokens[i]];
  double total = static_cast<double>(counts.size());
  const std::size_t windows = tokens.size() - w + 1;
  for (std::size_t start = 1; start < windows; ++start) {
    auto& leaving = counts[tokens[start - 1]];
    if (--leaving == 0) counts.erase(tokens[start - 1]);
    ++counts[tokens[start + w - 1]];
    total += static_cast<double>(counts.size());
  }
  return total / (static_cast<double>(windows) * static_cast<double>(w));
}

LexScore score(Tokens tokens, double h, std::size_t w, MtldMode mode) {
  LexScore s;
  s.mtld = mtld(tokens, h, mode);
  s.mattr = mattr(tokens, w);
  s.combined = kMtldWeight * s.mtld + s.mattr;
  return s;
}

Selection select_response(std::span<const std::string> candidates, double h, std::size_t w, MtldMode mode) {
  if (candidates.empty()) throw ContractError("select_response: empty candidate pool");
  Selection sel;
  sel.scores.reserve(candidates.size());
  for (const auto& text : candidates) {
    const auto tokens = seq::split_words(text);
    // An empty reply has no diversity to measure.
    sel.scores.push_back(tokens.empty() ? LexScore{} : score(tokens, h, w, mode));
  }
  // Scores that agree to within rounding are ties; MTLD reaches equal values
  // through different sums of partial factors.
  for (std::size_t i = 1; i < sel.scores.size(); ++i) {
    if (sel.scores[i].combined > sel.scores[sel.index].combined + kTieTolerance) sel.index = i;
  }
  return sel;
}

std::optional<double> distinct_n(std::span<const std::vector<std::string>> responses, std::size_t n) {
  if (n == 0) throw ContractError("distinct_n: n must be positive");
  double total = 0.0;
  std::size_t included = 0;
  for (const auto& r : responses) {
    if (r.size() < n) continue;
    std::set<std::vector<std::string>> grams;
    const std::size_t count = r.size() - n + 1;
    for (std::size_t i = 0; i < count; ++i) {
      grams.emplace(r.begin() + static_cast<std::ptrdiff_t>(i), r.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    total += static_cast<double>(grams.size()) / static_cast<double>(count);
    ++included;
  }
  if (included == 0) return std::nullopt;
  return total / static_cast<double>(included);
}

}  // namespace dlvgen::lex
