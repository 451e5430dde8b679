#include "dlvgen/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "dlvgen/corpus.hpp"
#include "dlvgen/errors.hpp"
#include "dlvgen/lexsel.hpp"

namespace dlvgen::eval {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string fixed3(std::optional<double> v) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << *v;
  return out.str();
}

struct Row {
  std::string name;
  const ModelEval* model;
  const Aggregate* agg;
};

std::vector<Row> rows_of(std::span<const ModelEval> models) {
  std::vector<Row> rows;
  for (const auto& m : models) {
    const std::string base = m.label.empty() ? std::string(variant_name(m.variant)) : m.label;
    rows.push_back({base, &m, &m.mean_over_n});
    rows.push_back({base + "+LS", &m, &m.selected});
  }
  return rows;
}

std::vector<std::string> cells(const Row& r) {
  return {r.name,
          fixed3(r.agg->distinct1),
          fixed3(r.agg->distinct2),
          fixed3(r.agg->consistency),
          fixed3(r.model->log_var_r_norm),
          fixed3(r.model->log_var_p_norm),
          std::to_string(r.agg->responses)};
}

const std::vector<std::string>& headers() {
  static const std::vector<std::string> h{"model",          "distinct1",      "distinct2", "consistency",
                                          "log_var_r_norm", "log_var_p_norm", "responses"};
  return h;
}

}  // namespace

Aggregate aggregate(std::span<const std::string> responses, std::span<const Persona* const> personas,
                    std::span<const Persona> all_personas) {
  if (responses.size() != personas.size()) throw ContractError("aggregate: one persona per response expected");
  Aggregate a;
  a.responses = responses.size();
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(responses.size());
  double proxy = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    tokens.push_back(seq::split_words(responses[i]));
    proxy += corpus::persona_consistency_proxy(responses[i], *personas[i], all_personas);
  }
  a.distinct1 = lex::distinct_n(tokens, 1);
  a.distinct2 = lex::distinct_n(tokens, 2);
  a.consistency = responses.empty() ? 0.0 : proxy / static_cast<double>(responses.size());
  return a;
}

LatentNorms prior_log_var_norms(const DialogueModel& model, std::span<const DialogueExample> examples) {
  LatentNorms out;
  if (model.variant() == Variant::plain || examples.empty()) return out;
  double r = 0.0;
  double p = 0.0;
  for (const auto& ex : examples) {
    Graph g(false);
    const auto priors = model.priors(g, seq::make_context_view(model.vocab(), ex.context));
    r += norm(priors.response->values().log_var);
    if (priors.persona) p += norm(priors.persona->values().log_var);
  }
  const double n = static_cast<double>(examples.size());
  out.response = r / n;
  if (model.variant() == Variant::dlvgen) out.persona = p / n;
  return out;
}

ModelEval evaluate_model(const DialogueModel& model, std::span<const DialogueExample> test,
                         std::span<const Persona> all_personas, const SelectionConfig& select, std::uint64_t seed,
                         std::string label) {
  if (test.empty()) throw ContractError("evaluate_model: empty test set");
  ModelEval out;
  out.label = std::move(label);
  out.variant = model.variant();
  out.contexts = test.size();

  GenerationSettings gen;
  gen.n = select.n_candidates;
  gen.beam = select.beam;
  gen.max_len = select.max_response_len;

  std::vector<std::string> all_texts, selected_texts, first_texts;
  std::vector<const Persona*> all_personas_of, per_context;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Rng rng(derive_seed(seed, 0xc0de0000ULL + i));
    auto set = generate_candidates(model, test[i].context, gen, rng);
    select_lexdiv(set, select);
    for (const auto& c : set.candidates) {
      all_texts.push_back(c.text);
      all_personas_of.push_back(&test[i].persona);
    }
    selected_texts.push_back(set.candidates[set.selected].text);
    first_texts.push_back(set.candidates.front().text);
    per_context.push_back(&test[i].persona);
    out.sets.push_back(std::move(set));
  }
  out.mean_over_n = aggregate(all_texts, all_personas_of, all_personas);
  out.selected = aggregate(selected_texts, per_context, all_personas);
  out.first = aggregate(first_texts, per_context, all_personas);
  const auto norms = prior_log_var_norms(model, test);
  out.log_var_r_norm = norms.response;
  out.log_var_p_norm = norms.persona;
  return out;
}

std::string format_table(std::span<const ModelEval> models) {
  const auto rows = rows_of(models);
  std::vector<std::vector<std::string>> table{headers()};
  for (const auto& r : rows) table.push_back(cells(r));
  std::vector<std::size_t> width(headers().size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  for (std::size_t l = 0; l < table.size(); ++l) {
    for (std::size_t c = 0; c < table[l].size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << table[l][c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << table[l][c];
      }
    }
    out << '\n';
    if (l == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

std::string format_tsv(std::span<const ModelEval> models) {
  std::ostringstream out;
  const auto& h = headers();
  for (std::size_t c = 0; c < h.size(); ++c) out << (c ? "\t" : "") << h[c];
  out << '\n';
  for (const auto& r : rows_of(models)) {
    const auto line = cells(r);
    for (std::size_t c = 0; c < line.size(); ++c) out << (c ? "\t" : "") << line[c];
    out << '\n';
  }
  return out.str();
}

}  // namespace dlvgen::eval
