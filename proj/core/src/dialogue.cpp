#include "dlvgen/dialogue.hpp"

namespace dlvgen {

std::string_view speaker_name(Speaker s) {
  switch (s) {
    case Speaker::user: return "user";
    case Speaker::agent: return "agent";
    case Speaker::untagged: return "untagged";
  }
  return "untagged";
}

}  // namespace dlvgen
