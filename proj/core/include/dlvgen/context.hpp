#pragma once

#include <span>
#include <vector>

#include "dlvgen/dialogue.hpp"
#include "dlvgen/vocab.hpp"

namespace dlvgen::seq {

// Every turn as SEP_USER/SEP_AGENT followed by its tokens.
std::vector<TokenId> flatten_context(const Vocab& vocab, std::span<const Turn> turns);

// Agent turns only, each prefixed by SEP_AGENT. With no agent turn the result
// is the single sentinel [SEP_AGENT]. Throws ContractError on an untagged turn.
std::vector<TokenId> mask_user_turns(const Vocab& vocab, std::span<const Turn> turns);

struct ContextView {
  std::vector<TokenId> full;
  std::vector<TokenId> persona_view;
};

ContextView make_context_view(const Vocab& vocab, std::span<const Turn> turns);

}  // namespace dlvgen::seq
