#include "dlvgen/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dlvgen/errors.hpp"
#include "dlvgen/rng.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::corpus {
namespace {

constexpr std::string_view kPersonaPrefix = "your persona:";
constexpr std::string_view kPartnerPrefix = "partner's persona:";

struct AttributeText {
  std::vector<std::string> values;
  std::vector<std::string> statements;  // persona description
  std::vector<std::string> questions;   // user asking the agent
  std::vector<std::string> reveals;     // agent answering
  std::string short_form;               // clause used in user remarks
};

const std::map<std::string, AttributeText, std::less<>>& attribute_text() {
  static const std::map<std::string, AttributeText, std::less<>> table{
      {"hobby",
       {{"fishing", "painting", "hiking", "swimming", "dancing", "gardening", "chess", "surfing"},
        {"i enjoy {} on weekends .", "my favorite hobby is {} ."},
        {"what do you do for fun ?", "do you have any hobbies ?", "what do you like to do on weekends ?"},
        {"i love {} .", "i enjoy {} in my free time .", "mostly {} , it relaxes me .", "{} is my favorite hobby ."},
        "i enjoy {}"}},
      {"food",
       {{"pizza", "sushi", "tacos", "pasta", "curry", "burgers", "salad", "noodles"},
        {"i love eating {} .", "my favorite food is {} ."},
        {"what is your favorite food ?", "what do you like to eat ?"},
        {"i love {} .", "{} is the best food .", "i could eat {} every day ."},
        "i love {}"}},
      {"job",
       {{"teacher", "nurse", "farmer", "pilot", "chef", "lawyer", "plumber", "writer"},
        {"i work as a {} .", "my job is {} ."},
        {"what do you do for a living ?", "what is your job ?"},
        {"i am a {} .", "i work as a {} .", "i have been a {} for years ."},
        "i am a {}"}},
      {"pet",
       {{"dog", "cat", "parrot", "rabbit", "hamster", "turtle", "horse", "goldfish"},
        {"i have a pet {} .", "i own a {} ."},
        {"do you have any pets ?", "what pet do you have ?"},
        {"i have a {} .", "my {} is my best friend .", "yes , a {} named max ."},
        "i have a {}"}},
      {"place",
       {{"paris", "tokyo", "london", "texas", "canada", "berlin", "mexico", "ohio"},
        {"i live in {} .", "i grew up in {} ."},
        {"where do you live ?", "where are you from ?"},
        {"i live in {} .", "i am from {} .", "{} is my home ."},
        "i live in {}"}},
  };
  return table;
}

const AttributeText& text_for(std::string_view attribute) {
  const auto& table = attribute_text();
  auto it = table.find(attribute);
  if (it == table.end()) throw ContractError("unknown persona attribute '" + std::string(attribute) + "'");
  return it->second;
}

std::string fill(std::string_view pattern, std::string_view value) {
  std::string out(pattern);
  const auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, value);
  return out;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

Persona sample_persona(Rng& rng, std::size_t index) {
  Persona p;
  p.id = "p" + std::to_string(index);
  for (const auto& attr : attribute_schema()) {
    const auto& t = text_for(attr);
    const auto& value = pick(rng, t.values);
    p.attributes[attr] = value;
    p.statements.push_back(fill(pick(rng, t.statements), value));
  }
  return p;
}

// The agent introduces two or three of its attributes in its first turn;
// every later user turn asks about one of them again, often after the user
// names a different value of the same attribute. Later replies can therefore
// be inferred from the agent's own earlier turns.
Dialogue script_dialogue(const Persona& persona, Rng& rng) {
  static const std::vector<std::string> greetings{"hi ! how are you ?", "hello , tell me about yourself .",
                                                  "hey there ! what are you like ?"};
  static const std::vector<std::string> openers{"hi !", "hello .", "good , thanks ."};
  static const std::vector<std::string> reactions{"", "cool .", "nice .", "oh really ?"};

  Dialogue d;
  d.persona = persona;
  auto attrs = attribute_schema();
  rng.shuffle(attrs.begin(), attrs.end());
  const std::size_t followups = 1 + rng.below(2);
  attrs.resize(followups + 1);

  auto other_value = [&](const std::string& attr) {
    std::vector<std::string> others;
    for (const auto& v : attribute_values(attr)) {
      if (v != persona.attributes.at(attr)) others.push_back(v);
    }
    return pick(rng, others);
  };

  std::string intro = pick(rng, openers);
  for (const auto& attr : attrs) intro += " " + fill(pick(rng, text_for(attr).reveals), persona.attributes.at(attr));
  d.turns.push_back({Speaker::user, pick(rng, greetings)});
  d.turns.push_back({Speaker::agent, intro});

  std::vector<std::string> asked(attrs.begin(), attrs.end());
  rng.shuffle(asked.begin(), asked.end());
  for (std::size_t i = 0; i < followups; ++i) {
    const auto& attr = asked[i];
    const auto& t = text_for(attr);
    std::string user;
    std::string agent;
    if (rng.below(2) == 0) {
      user = fill(t.short_form, other_value(attr)) + " . ";
      agent = pick(rng, reactions);
      if (!agent.empty()) agent += ' ';
    }
    user += pick(rng, t.questions);
    agent += fill(pick(rng, t.reveals), persona.attributes.at(attr));
    d.turns.push_back({Speaker::user, std::move(user)});
    d.turns.push_back({Speaker::agent, std::move(agent)});
  }
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out << text;
  if (!out) throw FileError("write failed for " + path.string());
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& attribute_schema() {
  static const std::vector<std::string> schema{"hobby", "food", "job", "pet", "place"};
  return schema;
}

const std::vector<std::string>& attribute_values(std::string_view attribute) { return text_for(attribute).values; }

std::vector<DialogueExample> to_examples(const Dialogue& dialogue) {
  std::vector<DialogueExample> out;
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    if (dialogue.turns[i].speaker != Speaker::agent || i == 0) continue;
    DialogueExample ex;
    ex.persona = dialogue.persona;
    ex.context.assign(dialogue.turns.begin(), dialogue.turns.begin() + static_cast<std::ptrdiff_t>(i));
    ex.response = dialogue.turns[i].text;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<DialogueExample> to_examples(std::span<const Dialogue> dialogues) {
  std::vector<DialogueExample> out;
  for (const auto& d : dialogues) {
    auto part = to_examples(d);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

Corpus generate_corpus(std::size_t n_personas, std::size_t n_dialogues, std::uint64_t seed) {
  if (n_personas < 2) throw ContractError("generate_corpus: need at least 2 personas");
  std::size_t max_personas = 1;
  for (const auto& attr : attribute_schema()) max_personas *= attribute_values(attr).size();
  if (n_personas > max_personas) throw ContractError("generate_corpus: more personas than attribute combinations");

  Corpus c;
  c.seed = seed;
  Rng persona_rng(derive_seed(seed, 0xbe75));
  std::set<std::map<std::string, std::string>> seen;
  while (c.personas.size() < n_personas) {
    auto p = sample_persona(persona_rng, c.personas.size());
    if (seen.insert(p.attributes).second) c.personas.push_back(std::move(p));
  }
  c.test_personas = std::max<std::size_t>(1, (n_personas + 5) / 10);
  const std::size_t train_personas = n_personas - c.test_personas;

  std::size_t n_test = (n_dialogues + 5) / 10;
  if (n_test == 0 && n_dialogues >= 2) n_test = 1;
  const std::size_t n_train = n_dialogues - n_test;
  for (std::size_t i = 0; i < n_dialogues; ++i) {
    Rng rng(derive_seed(seed, 0x10000 + i));
    const bool is_test = i >= n_train;
    const std::size_t persona =
        is_test ? train_personas + rng.below(c.test_personas) : rng.below(train_personas);
    auto dialogue = script_dialogue(c.personas[persona], rng);
    (is_test ? c.test : c.train).push_back(std::move(dialogue));
  }
  return c;
}

std::string to_personachat(std::span<const Dialogue> dialogues) {
  std::ostringstream out;
  for (const auto& d : dialogues) {
    if (d.turns.size() % 2 != 0) throw ContractError("to_personachat: dialogue must end on an agent turn");
    std::size_t n = 1;
    for (const auto& s : d.persona.statements) out << n++ << ' ' << kPersonaPrefix << ' ' << s << '\n';
    for (std::size_t i = 0; i < d.turns.size(); i += 2) {
      if (d.turns[i].speaker != Speaker::user || d.turns[i + 1].speaker != Speaker::agent) {
        throw ContractError("to_personachat: turns must alternate user, agent");
      }
      out << n++ << ' ' << d.turns[i].text << '\t' << d.turns[i + 1].text << '\n';
    }
  }
  return out.str();
}

std::vector<DialogueExample> parse_personachat(std::string_view text) {
  std::vector<DialogueExample> out;
  Persona persona;
  std::vector<Turn> history;
  bool started = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ParseError("personachat line " + std::to_string(line_no) + ": " + why);
    };
    std::size_t number = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), number);
    if (ec != std::errc() || ptr == line.data() + line.size() || *ptr != ' ') fail("expected a line number");
    const std::string body = trim(std::string_view(ptr + 1, line.data() + line.size() - ptr - 1));
    if (number == 1 || !started) {
      if (number != 1) fail("dialogue does not start at 1");
      persona = Persona{};
      history.clear();
      started = true;
    }
    if (body.starts_with(kPersonaPrefix)) {
      persona.statements.push_back(trim(std::string_view(body).substr(kPersonaPrefix.size())));
      continue;
    }
    if (body.starts_with(kPartnerPrefix)) continue;
    const auto tab = body.find('\t');
    if (tab == std::string::npos) fail("exchange line has no tab between user and agent utterances");
    const auto fields = split(body, '\t');
    const std::string user = trim(fields[0]);
    const std::string agent = trim(fields[1]);
    if (agent.empty()) fail("empty agent utterance");
    history.push_back({Speaker::user, user});
    DialogueExample ex;
    ex.persona = persona;
    ex.context = history;
    ex.response = agent;
    out.push_back(std::move(ex));
    history.push_back({Speaker::agent, agent});
  }
  return out;
}

std::vector<DialogueExample> load_personachat(const std::filesystem::path& path) {
  return parse_personachat(read_text(path));
}

void write_corpus(const std::filesystem::path& dir, const Corpus& c) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FileError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "train.txt", to_personachat(c.train));
  write_text(dir / "test.txt", to_personachat(c.test));

  std::ostringstream personas;
  personas << "id\tsplit\tattributes\tstatements\n";
  for (std::size_t i = 0; i < c.personas.size(); ++i) {
    const auto& p = c.personas[i];
    std::vector<std::string> attrs;
    for (const auto& [k, v] : p.attributes) attrs.push_back(k + "=" + v);
    personas << p.id << '\t' << (i + c.test_personas >= c.personas.size() ? "test" : "train") << '\t'
             << join(attrs, ";") << '\t' << join(p.statements, " | ") << '\n';
  }
  write_text(dir / "personas.tsv", personas.str());

  std::ostringstream manifest;
  manifest << "seed = " << c.seed << '\n'
           << "n_personas = " << c.personas.size() << '\n'
           << "n_dialogues = " << c.train.size() + c.test.size() << '\n'
           << "test_personas = " << c.test_personas << '\n'
           << "train_dialogues = " << c.train.size() << '\n'
           << "test_dialogues = " << c.test.size() << '\n'
           << "train_examples = " << to_examples(c.train).size() << '\n'
           << "test_examples = " << to_examples(c.test).size() << '\n';
  write_text(dir / "manifest.txt", manifest.str());
}

LoadedCorpus load_corpus(const std::filesystem::path& dir) {
  LoadedCorpus out;
  out.train = load_personachat(dir / "train.txt");
  out.test = load_personachat(dir / "test.txt");
  const auto table = dir / "personas.tsv";
  if (!std::filesystem::exists(table)) return out;

  std::size_t line_no = 0;
  for (const auto& line : split(read_text(table), '\n')) {
    if (++line_no == 1 || trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) throw ParseError("personas.tsv line " + std::to_string(line_no) + ": expected 4 fields");
    Persona p;
    p.id = fields[0];
    for (const auto& kv : split(fields[2], ';')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ParseError("personas.tsv line " + std::to_string(line_no) + ": bad attribute '" + kv + "'");
      }
      p.attributes[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const auto& s : split(fields[3], '|')) p.statements.push_back(trim(s));
    out.personas.push_back(std::move(p));
  }
  for (auto* set : {&out.train, &out.test}) {
    for (auto& ex : *set) {
      for (const auto& p : out.personas) {
        if (p.statements == ex.persona.statements) {
          ex.persona = p;
          break;
        }
      }
    }
  }
  return out;
}

std::vector<std::string> example_texts(std::span<const DialogueExample> examples) {
  std::vector<std::string> out;
  std::set<std::vector<std::string>> personas_seen;
  for (const auto& ex : examples) {
    if (personas_seen.insert(ex.persona.statements).second) {
      out.insert(out.end(), ex.persona.statements.begin(), ex.persona.statements.end());
    }
    // Contexts repeat earlier examples of the same dialogue; the last turn is
    // the only new one.
    if (!ex.context.empty()) out.push_back(ex.context.back().text);
    out.push_back(ex.response);
  }
  return out;
}

seq::Vocab build_vocab(std::span<const DialogueExample> examples, std::size_t max_size) {
  const auto texts = example_texts(examples);
  return seq::Vocab::build(texts, max_size);
}

int persona_consistency_proxy(std::string_view response, const Persona& persona, std::span<const Persona> all) {
  const auto words = seq::split_words(response);
  const std::set<std::string> tokens(words.begin(), words.end());
  for (const auto& [attr, value] : persona.attributes) {
    if (tokens.count(value)) return 1;
  }
  for (const auto& [attr, value] : persona.attributes) {
    for (const auto& other : all) {
      auto it = other.attributes.find(attr);
      if (it != other.attributes.end() && it->second != value && tokens.count(it->second)) return -1;
    }
  }
  return 0;
}

}  // namespace dlvgen::corpus
