#include "dlvgen/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "dlvgen/errors.hpp"

namespace dlvgen::seq {
namespace {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> specials = {"<pad>", "<bos>", "<eos>", "<unk>", "<user>", "<agent>"};
  return specials;
}

bool is_split_punct(char c) { return c == '.' || c == ',' || c == '!' || c == '?'; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (is_split_punct(raw)) {
      flush();
      out.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
  id_to_token_ = special_tokens();
  for (auto& t : tokens) {
    if (t.empty()) throw ContractError("vocabulary token must be nonempty");
    id_to_token_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i)).second) {
      throw ContractError("duplicate vocabulary token: " + id_to_token_[i]);
    }
  }
}

Vocab Vocab::build(std::span<const std::string> texts, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& w : split_words(text)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t room = max_size > kSpecialCount ? max_size - kSpecialCount : 0;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < ranked.size() && tokens.size() < room; ++i) {
    if (std::find(special_tokens().begin(), special_tokens().end(), ranked[i].first) != special_tokens().end()) {
      continue;
    }
    tokens.push_back(ranked[i].first);
  }
  return Vocab(std::move(tokens));
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write vocabulary file " + path.string());
  for (std::size_t i = kSpecialCount; i < id_to_token_.size(); ++i) out << id_to_token_[i] << '\n';
}

TokenId Vocab::id(std::string_view word) const {
  auto it = token_to_id_.find(std::string(word));
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(size()));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view word) const { return token_to_id_.count(std::string(word)) > 0; }

std::vector<std::string> Vocab::regular_tokens() const {
  return {id_to_token_.begin() + static_cast<std::ptrdiff_t>(kSpecialCount), id_to_token_.end()};
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (auto id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    if (!out.empty()) out.push_back(' ');
    out += token(id);
  }
  return out;
}

}  // namespace dlvgen::seq
