#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlvgen/dialogue.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::corpus {

// hobby, food, job, pet, place.
const std::vector<std::string>& attribute_schema();
// Single-word value keywords for one attribute. Throws ContractError for an
// attribute outside the schema.
const std::vector<std::string>& attribute_values(std::string_view attribute);

// A scripted conversation: user and agent alternate, user first, agent last.
struct Dialogue {
  Persona persona;  // the agent's
  std::vector<Turn> turns;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// One example per agent turn, with every earlier turn as context.
std::vector<DialogueExample> to_examples(const Dialogue& dialogue);
std::vector<DialogueExample> to_examples(std::span<const Dialogue> dialogues);

struct Corpus {
  std::uint64_t seed = 0;
  std::vector<Persona> personas;  // training personas first, then test
  std::size_t test_personas = 0;
  std::vector<Dialogue> train;
  std::vector<Dialogue> test;
};

// Samples n_personas distinct personas over the attribute schema and scripts
// n_dialogues conversations. About a tenth of the personas (at least one) are
// held out and own about a tenth of the dialogues, so no test persona is seen
// in training. Requires n_personas >= 2.
Corpus generate_corpus(std::size_t n_personas, std::size_t n_dialogues, std::uint64_t seed);

// PersonaChat text format: per dialogue, numbered "your persona: ..." lines
// followed by numbered "user<TAB>agent" exchange lines; numbering restarts at
// 1 for each dialogue.
std::string to_personachat(std::span<const Dialogue> dialogues);
// Inverse of to_personachat at the example level. Fields after the agent
// utterance and "partner's persona:" lines (present in ConvAI2 files) are
// ignored. Personas come back without id or attributes. Throws ParseError
// naming the line on malformed input.
std::vector<DialogueExample> parse_personachat(std::string_view text);
std::vector<DialogueExample> load_personachat(const std::filesystem::path& path);

// Directory layout: train.txt and test.txt (PersonaChat format),
// personas.tsv (id, split, attributes, statements) and manifest.txt.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

struct LoadedCorpus {
  std::vector<Persona> personas;
  std::vector<DialogueExample> train;
  std::vector<DialogueExample> test;
};

// Reads a directory written by write_corpus. Example personas whose
// statements match an entry of personas.tsv get its id and attributes back;
// personas.tsv is optional (plain PersonaChat files).
LoadedCorpus load_corpus(const std::filesystem::path& dir);

// Every persona statement, context turn and response, for vocabulary building.
std::vector<std::string> example_texts(std::span<const DialogueExample> examples);

// Vocabulary over example_texts(), most frequent words first.
seq::Vocab build_vocab(std::span<const DialogueExample> examples, std::size_t max_size);

// +1 when the response contains one of the persona's own value keywords, else
// -1 when it contains another persona's value for one of the same attributes,
// else 0. Whole-token, case-insensitive matching.
int persona_consistency_proxy(std::string_view response, const Persona& persona, std::span<const Persona> all);

}  // namespace dlvgen::corpus
