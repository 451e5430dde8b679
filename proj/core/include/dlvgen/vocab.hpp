#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dlvgen::seq {

using TokenId = int;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kSepUser = 4;
inline constexpr TokenId kSepAgent = 5;
inline constexpr std::size_t kSpecialCount = 6;

// Lowercases, splits on whitespace and splits . , ! ? into their own tokens.
std::vector<std::string> split_words(std::string_view text);

class Vocab {
 public:
  // Special tokens only.
  Vocab();
  // Non-special tokens in id order, starting at id 6.
  explicit Vocab(std::vector<std::string> tokens);

  // Most frequent words of the texts (ties broken alphabetically), capped so
  // the vocabulary including specials holds at most max_size entries.
  static Vocab build(std::span<const std::string> texts, std::size_t max_size);

  // One token per line; line k (0-based) holds id 6 + k.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  TokenId id(std::string_view word) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view word) const;
  std::size_t size() const { return id_to_token_.size(); }
  // Non-special tokens in id order.
  std::vector<std::string> regular_tokens() const;

  std::vector<TokenId> encode(std::string_view text) const;
  // Space-joined tokens; PAD, BOS and EOS are dropped.
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

}  // namespace dlvgen::seq
