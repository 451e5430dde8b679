#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlvgen/dialogue.hpp"
#include "dlvgen/generate.hpp"
#include "dlvgen/model.hpp"

namespace dlvgen::eval {

// Scores over a list of responses.
struct Aggregate {
  std::optional<double> distinct1;  // absent when no response qualifies
  std::optional<double> distinct2;
  double consistency = 0.0;  // mean persona-consistency proxy
  std::size_t responses = 0;
};

Aggregate aggregate(std::span<const std::string> responses, std::span<const Persona* const> personas,
                    std::span<const Persona> all_personas);

struct ModelEval {
  std::string label;
  Variant variant = Variant::dlvgen;
  std::size_t contexts = 0;
  Aggregate mean_over_n;  // every candidate
  Aggregate selected;     // lexical-diversity pick per context
  Aggregate first;        // candidate 0 per context
  std::optional<double> log_var_r_norm;  // mean ||log var|| of the response prior
  std::optional<double> log_var_p_norm;  // mean ||log var|| of the persona prior
  std::vector<CandidateSet> sets;        // one per test example, selection applied
};

struct LatentNorms {
  std::optional<double> response;
  std::optional<double> persona;
};

// Mean Euclidean norm of the prior log-variances over the examples' contexts.
LatentNorms prior_log_var_norms(const DialogueModel& model, std::span<const DialogueExample> examples);

// Generates N candidates for every example (noise stream derived from
// (seed, example index), so models evaluated with one seed see the same
// streams), applies lexical-diversity selection and aggregates. Throws
// ContractError on an empty test set.
ModelEval evaluate_model(const DialogueModel& model, std::span<const DialogueExample> test,
                         std::span<const Persona> all_personas, const SelectionConfig& select, std::uint64_t seed,
                         std::string label = {});

// Two rows per model: mean over N, then "+LS" (selected only). Numbers to 3
// decimals; "-" marks a value the variant does not have.
std::string format_table(std::span<const ModelEval> models);
std::string format_tsv(std::span<const ModelEval> models);

}  // namespace dlvgen::eval
