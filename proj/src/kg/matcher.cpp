#include "scidraft/kg/matcher.hpp"

#include <algorithm>

namespace scidraft::kg {

namespace {

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

EntityMatcher::EntityMatcher(const KnowledgeGraph& graph) {
  for (const Entity& e : graph.entities()) {
    const auto tokens = name_tokens(e);
    if (tokens.empty()) continue;
    lexicon_.try_emplace(join(tokens), e.id);
    longest_ = std::max(longest_, tokens.size());
  }
}

std::vector<EntityMatch> EntityMatcher::match(std::span<const std::string> tokens) const {
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(to_lower(t));

  std::vector<EntityMatch> out;
  std::size_t i = 0;
  while (i < lowered.size()) {
    bool found = false;
    for (std::size_t len = std::min(longest_, lowered.size() - i); len > 0; --len) {
      auto it = lexicon_.find(join(std::span<const std::string>(lowered).subspan(i, len)));
      if (it != lexicon_.end()) {
        out.push_back(EntityMatch{it->second, i, i + len});
        i += len;
        found = true;
        break;
      }
    }
    if (!found) ++i;
  }
  return out;
}

std::vector<EntityMatch> match_title_entities(std::span<const std::string> tokens, const KnowledgeGraph& graph) {
  return EntityMatcher(graph).match(tokens);
}

}  // namespace scidraft::kg
