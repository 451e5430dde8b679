#include "dlvgen/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"

namespace dlvgen::seq {
namespace {

struct Expansion {
  std::size_t beam_index;
  TokenId token;
  double log_prob;
  double normalized;
};

bool better_expansion(const Expansion& a, const Expansion& b) {
  if (a.normalized != b.normalized) return a.normalized > b.normalized;
  if (a.token != b.token) return a.token < b.token;
  return a.beam_index < b.beam_index;
}

Hypothesis run_beam(const NextTokenScorer& scorer, const BeamSettings& s) {
  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> finished;
  for (std::size_t step = 0; step < s.max_len && !live.empty(); ++step) {
    std::vector<Expansion> expansions;
    const double new_len = static_cast<double>(step + 1);
    for (std::size_t b = 0; b < live.size(); ++b) {
      const auto log_probs = scorer(live[b].tokens);
      for (std::size_t tok = 0; tok < log_probs.size(); ++tok) {
        const double lp = live[b].log_prob + log_probs[tok];
        expansions.push_back({b, static_cast<TokenId>(tok), lp, lp / new_len});
      }
    }
    std::sort(expansions.begin(), expansions.end(), better_expansion);
    std::vector<Hypothesis> next;
    for (std::size_t rank = 0; rank < expansions.size() && next.size() < s.beam; ++rank) {
      const auto& ex = expansions[rank];
      Hypothesis h{live[ex.beam_index].tokens, ex.log_prob, false};
      if (ex.token == s.eos) {
        if (rank < s.beam) {
          h.finished = true;
          finished.push_back(std::move(h));
        }
        continue;
      }
      h.tokens.push_back(ex.token);
      next.push_back(std::move(h));
    }
    live = std::move(next);
    if (finished.size() >= s.beam) break;
  }
  const auto& pool = finished.empty() ? live : finished;
  if (pool.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].normalized() > pool[best].normalized()) best = i;
  }
  return pool[best];
}

}  // namespace

double Hypothesis::normalized() const {
  const auto n = length();
  return n == 0 ? 0.0 : log_prob / static_cast<double>(n);
}

Hypothesis beam_search(const NextTokenScorer& scorer, const BeamSettings& settings) {
  if (settings.beam == 0) throw ContractError("beam_search: beam must be at least 1");
  auto best = run_beam(scorer, settings);
  if (settings.beam > 1) {
    BeamSettings greedy = settings;
    greedy.beam = 1;
    auto g = run_beam(scorer, greedy);
    if (g.normalized() > best.normalized()) best = std::move(g);
  }
  return best;
}

NextTokenScorer decoder_scorer(const DecoderModel& decoder, std::span<const TokenId> context,
                               std::optional<Tensor> injection) {
  std::vector<TokenId> ctx(context.begin(), context.end());
  return [&decoder, ctx = std::move(ctx), injection = std::move(injection)](std::span<const TokenId> prefix) {
    Graph g(false);
    std::optional<Var> v;
    if (injection) v = g.constant(*injection);
    Var logits = decoder.forward_logits(g, ctx, prefix, v);
    const Tensor& L = logits.value();
    const std::size_t V = L.cols();
    const double* row = L.data() + (L.rows() - 1) * V;
    // Only EOS and regular words may be emitted; the distribution is
    // renormalized over them.
    auto allowed = [](std::size_t c) { return c == static_cast<std::size_t>(kEos) || c >= kSpecialCount; };
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < V; ++c) {
      if (allowed(c)) mx = std::max(mx, row[c]);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < V; ++c) {
      if (allowed(c)) z += std::exp(row[c] - mx);
    }
    const double lse = mx + std::log(z);
    std::vector<double> out(V, -std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < V; ++c) {
      if (allowed(c)) out[c] = row[c] - lse;
    }
    return out;
  };
}

std::vector<TokenId> beam_search(const DecoderModel& decoder, std::span<const TokenId> context,
                                 const std::optional<Tensor>& injection, std::size_t beam, std::size_t max_len) {
  BeamSettings s;
  s.beam = beam;
  s.max_len = max_len;
  return beam_search(decoder_scorer(decoder, context, injection), s).tokens;
}

}  // namespace dlvgen::seq

namespace dlvgen {

std::vector<std::string> CandidateSet::texts() const {
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.text);
  return out;
}

CandidateSet generate_candidates(const DialogueModel& model, std::span<const Turn> context,
                                 const GenerationSettings& settings, Rng& rng) {
  if (settings.n == 0) throw ContractError("generate_candidates: n must be at least 1");
  const auto view = seq::make_context_view(model.vocab(), context);
  if (view.full.empty()) throw ContractError("generate_candidates: empty context");
  const auto& decoder = model.decoder();
  const std::size_t d = model.config().d_latent;

  CandidateSet set;
  auto decode = [&](const std::optional<Tensor>& injection) {
    const auto ids = seq::beam_search(decoder, view.full, injection, settings.beam, settings.max_len);
    return model.vocab().decode(ids);
  };

  if (model.variant() == Variant::plain) {
    const auto text = decode(std::nullopt);
    for (std::size_t i = 0; i < settings.n; ++i) set.candidates.push_back({text, {}});
    return set;
  }

  Graph g(false);
  const auto priors = model.priors(g, view);
  const auto persona = priors.persona ? std::optional(priors.persona->values()) : std::nullopt;
  const auto response = priors.response->values();
  for (std::size_t i = 0; i < settings.n; ++i) {
    Graph draw(false);
    Var z_p = draw.constant(Tensor({d}));
    if (persona) z_p = latent::reparameterize(latent::Gaussian::constant(draw, *persona), rng);
    Var z_r = latent::reparameterize(latent::Gaussian::constant(draw, response), rng);
    Var v = decoder.inject_latent(z_p, z_r);
    set.candidates.push_back({decode(v.value()), {}});
  }
  return set;
}

void select_lexdiv(CandidateSet& set, const SelectionConfig& config) {
  const auto sel = lex::select_response(set.texts(), config.h, config.w, config.mtld_mode);
  for (std::size_t i = 0; i < set.candidates.size(); ++i) set.candidates[i].score = sel.scores[i];
  set.selected = sel.index;
}

}  // namespace dlvgen
