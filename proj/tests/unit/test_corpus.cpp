#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dlvgen/corpus.hpp"
#include "dlvgen/errors.hpp"
#include "dlvgen/vocab.hpp"
#include "test_support.hpp"

using namespace dlvgen;
using namespace dlvgen::corpus;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

Persona persona_with(std::map<std::string, std::string> attrs) {
  Persona p;
  p.attributes = std::move(attrs);
  return p;
}

}  // namespace

TEST(Generate, DeterministicAndByteIdenticalFiles) {
  const auto a = generate_corpus(6, 60, 9);
  const auto b = generate_corpus(6, 60, 9);
  EXPECT_EQ(a.personas, b.personas);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  TempDir d1("dlvgen_corpus_a"), d2("dlvgen_corpus_b");
  write_corpus(d1.path, a);
  write_corpus(d2.path, b);
  for (const char* f : {"train.txt", "test.txt", "personas.tsv", "manifest.txt"}) {
    EXPECT_EQ(slurp(d1.path / f), slurp(d2.path / f)) << f;
  }
  const auto c = generate_corpus(6, 60, 10);
  EXPECT_NE(a.train, c.train);
}

TEST(Generate, CountsAndPersonaDisjointSplit) {
  const auto c = generate_corpus(20, 2000, 1);
  EXPECT_EQ(c.personas.size(), 20u);
  EXPECT_EQ(c.train.size() + c.test.size(), 2000u);
  EXPECT_EQ(c.test.size(), 200u);
  EXPECT_EQ(c.test_personas, 2u);
  std::set<std::string> train_ids, test_ids;
  for (const auto& d : c.train) train_ids.insert(d.persona.id);
  for (const auto& d : c.test) test_ids.insert(d.persona.id);
  for (const auto& id : test_ids) EXPECT_FALSE(train_ids.count(id)) << id;
  EXPECT_EQ(train_ids.size(), 18u);
  EXPECT_EQ(test_ids.size(), 2u);
  EXPECT_THROW(generate_corpus(1, 10, 1), ContractError);
}

TEST(Generate, PersonaInvariants) {
  const auto c = generate_corpus(20, 100, 4);
  std::set<std::map<std::string, std::string>> seen;
  for (const auto& p : c.personas) {
    EXPECT_GE(p.statements.size(), 3u);
    EXPECT_EQ(p.attributes.size(), attribute_schema().size());
    EXPECT_TRUE(seen.insert(p.attributes).second);
    for (const auto& [attr, value] : p.attributes) {
      const auto& values = attribute_values(attr);
      EXPECT_NE(std::find(values.begin(), values.end(), value), values.end());
      bool in_statement = false;
      for (const auto& s : p.statements) {
        const auto words = seq::split_words(s);
        in_statement |= std::find(words.begin(), words.end(), value) != words.end();
      }
      EXPECT_TRUE(in_statement) << attr << "=" << value;
    }
  }
  EXPECT_THROW(attribute_values("colour"), ContractError);
}

TEST(Generate, DialoguesAlternateAndEndWithAgent) {
  const auto c = generate_corpus(5, 50, 2);
  std::size_t turns = 0;
  for (const auto& d : c.train) {
    ASSERT_GE(d.turns.size(), 2u);
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
      EXPECT_EQ(d.turns[i].speaker, i % 2 == 0 ? Speaker::user : Speaker::agent);
    }
    turns += d.turns.size();
  }
  const double mean = static_cast<double>(turns) / static_cast<double>(c.train.size());
  EXPECT_GE(mean, 4.0);
  EXPECT_LE(mean, 8.0);
}

TEST(Generate, ExamplesOnePerAgentTurn) {
  const auto c = generate_corpus(4, 10, 2);
  const auto& d = c.train.front();
  const auto ex = to_examples(d);
  ASSERT_EQ(ex.size(), d.turns.size() / 2);
  for (std::size_t k = 0; k < ex.size(); ++k) {
    EXPECT_EQ(ex[k].context.size(), 2 * k + 1);
    EXPECT_EQ(ex[k].response, d.turns[2 * k + 1].text);
    EXPECT_EQ(ex[k].persona, d.persona);
  }
}

TEST(Generate, GoldResponsesScoreAboveHalfOnProxy) {
  const auto c = generate_corpus(20, 2000, 1);
  const auto ex = to_examples(c.test);
  double total = 0.0;
  for (const auto& e : ex) total += persona_consistency_proxy(e.response, e.persona, c.personas);
  EXPECT_GT(total / static_cast<double>(ex.size()), 0.5);
}

TEST(PersonaChat, ParseExamples) {
  const std::string text =
      "1 your persona: i love food.\n"
      "2 your persona: i have a dog.\n"
      "3 hi there\thello ! i love food .\n"
      "4 what pet ?\ti have a dog .\n";
  const auto ex = parse_personachat(text);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].persona.statements, (std::vector<std::string>{"i love food.", "i have a dog."}));
  EXPECT_EQ(ex[0].context.size(), 1u);
  EXPECT_EQ(ex[1].context.size(), 3u);
  EXPECT_EQ(ex[0].context[0], (Turn{Speaker::user, "hi there"}));
  EXPECT_EQ(ex[1].context[1], (Turn{Speaker::agent, "hello ! i love food ."}));
  EXPECT_EQ(ex[1].response, "i have a dog .");
}

TEST(PersonaChat, NumberingRestartsAndExtrasAreIgnored) {
  const std::string text =
      "1 your persona: i like tea.\n"
      "2 partner's persona: i like coffee.\n"
      "3 hey\thi\t\tcandidate one|candidate two\n"
      "1 your persona: i swim.\n"
      "2 hello\tyo\n";
  const auto ex = parse_personachat(text);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].persona.statements, (std::vector<std::string>{"i like tea."}));
  EXPECT_EQ(ex[0].response, "hi");
  EXPECT_EQ(ex[1].persona.statements, (std::vector<std::string>{"i swim."}));
  EXPECT_EQ(ex[1].context.size(), 1u);
}

TEST(PersonaChat, MalformedLinesNameTheLine) {
  try {
    parse_personachat("1 your persona: i love food.\n2 no tab here\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_personachat("x your persona: a\n"), ParseError);
  EXPECT_THROW(load_personachat("/nonexistent/file.txt"), FileError);
}

TEST(PersonaChat, RoundTripReproducesExamples) {
  const auto c = generate_corpus(5, 40, 6);
  const auto text = to_personachat(c.train);
  const auto parsed = parse_personachat(text);
  const auto direct = to_examples(c.train);
  ASSERT_EQ(parsed.size(), direct.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(parsed[i].context, direct[i].context);
    EXPECT_EQ(parsed[i].response, direct[i].response);
    EXPECT_EQ(parsed[i].persona.statements, direct[i].persona.statements);
  }
}

TEST(CorpusFiles, LoadRestoresPersonaIdentity) {
  const auto c = generate_corpus(5, 40, 6);
  TempDir d("dlvgen_corpus_load");
  write_corpus(d.path, c);
  const auto loaded = load_corpus(d.path);
  EXPECT_EQ(loaded.personas, c.personas);
  EXPECT_EQ(loaded.train, to_examples(c.train));
  EXPECT_EQ(loaded.test, to_examples(c.test));
  const auto manifest = slurp(d.path / "manifest.txt");
  EXPECT_NE(manifest.find("seed"), std::string::npos);
}

TEST(Proxy, Examples) {
  const auto me = persona_with({{"hobby", "fishing"}, {"pet", "dog"}});
  const auto other = persona_with({{"hobby", "painting"}, {"pet", "cat"}});
  const std::vector<Persona> all = {me, other};
  EXPECT_EQ(persona_consistency_proxy("i love fishing", me, all), 1);
  EXPECT_EQ(persona_consistency_proxy("i love painting", me, all), -1);
  EXPECT_EQ(persona_consistency_proxy("hello there !", me, all), 0);
  EXPECT_EQ(persona_consistency_proxy("I LOVE Fishing!", me, all), 1);
  // Whole tokens only.
  EXPECT_EQ(persona_consistency_proxy("dogs and cats", me, all), 0);
  // Own value wins over a conflicting one.
  EXPECT_EQ(persona_consistency_proxy("fishing beats painting", me, all), 1);
}

TEST(Vocabulary, BuiltFromExamplesCoversPersonaWords) {
  const auto s = dlvgen::testing::tiny_setup();
  for (const auto& p : s.corpus.personas) {
    for (const auto& [attr, value] : p.attributes) {
      if (&p - s.corpus.personas.data() < static_cast<std::ptrdiff_t>(s.corpus.personas.size() - s.corpus.test_personas)) {
        EXPECT_TRUE(s.vocab.contains(value)) << value;
      }
    }
  }
  EXPECT_LE(corpus::build_vocab(s.train, 20).size(), 20u);
}
