#include "dlvgen/context.hpp"

#include <string>

#include "dlvgen/errors.hpp"

namespace dlvgen::seq {
namespace {

void require_tagged(const Turn& turn, std::size_t index) {
  if (turn.speaker != Speaker::user && turn.speaker != Speaker::agent) {
    throw ContractError("context turn " + std::to_string(index) + " has no speaker tag");
  }
}

void append_turn(const Vocab& vocab, const Turn& turn, std::vector<TokenId>& out) {
  out.push_back(turn.speaker == Speaker::user ? kSepUser : kSepAgent);
  const auto ids = vocab.encode(turn.text);
  out.insert(out.end(), ids.begin(), ids.end());
}

}  // namespace

std::vector<TokenId> flatten_context(const Vocab& vocab, std::span<const Turn> turns) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    require_tagged(turns[i], i);
    append_turn(vocab, turns[i], out);
  }
  return out;
}

std::vector<TokenId> mask_user_turns(const Vocab& vocab, std::span<const Turn> turns) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    require_tagged(turns[i], i);
    if (turns[i].speaker == Speaker::agent) append_turn(vocab, turns[i], out);
  }
  if (out.empty()) out.push_back(kSepAgent);
  return out;
}

ContextView make_context_view(const Vocab& vocab, std::span<const Turn> turns) {
  return {flatten_context(vocab, turns), mask_user_turns(vocab, turns)};
}

}  // namespace dlvgen::seq
