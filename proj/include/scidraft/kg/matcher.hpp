#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scidraft/kg/graph.hpp"

namespace scidraft::kg {

struct EntityMatch {
  EntityId entity = 0;
  std::size_t begin = 0;  // first token
  std::size_t end = 0;    // one past the last token

  bool operator==(const EntityMatch&) const = default;
};

// Case-insensitive dictionary matcher over entity surface names. Scans left
// to right taking the longest name starting at each position; spans never
// overlap. Names shared by several entities resolve to the lowest id.
class EntityMatcher {
 public:
  explicit EntityMatcher(const KnowledgeGraph& graph);

  std::vector<EntityMatch> match(std::span<const std::string> tokens) const;

 private:
  std::unordered_map<std::string, EntityId> lexicon_;
  std::size_t longest_ = 0;
};

std::vector<EntityMatch> match_title_entities(std::span<const std::string> tokens, const KnowledgeGraph& graph);

}  // namespace scidraft::kg
