#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dlvgen {

enum class Speaker { user, agent, untagged };

std::string_view speaker_name(Speaker s);

struct Turn {
  Speaker speaker = Speaker::untagged;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Persona {
  std::string id;
  std::vector<std::string> statements;
  // attribute -> value keyword; empty for personas read from PersonaChat files.
  std::map<std::string, std::string> attributes;

  friend bool operator==(const Persona&, const Persona&) = default;
};

// One agent reply together with everything said before it.
struct DialogueExample {
  Persona persona;
  std::vector<Turn> context;
  std::string response;

  friend bool operator==(const DialogueExample&, const DialogueExample&) = default;
};

}  // namespace dlvgen
