#include "scidraft/kg/context.hpp"

#include <algorithm>
#include <stdexcept>

#include "scidraft/error.hpp"

namespace scidraft::kg {

void ContextIndex::add_sentence(SentenceId id, std::vector<std::string> tokens, std::span<const EntityId> entities) {
  if (sentences_.contains(id)) throw DataError("duplicate sentence id " + std::to_string(id));
  Sentence s;
  s.tokens.reserve(tokens.size());
  for (auto& t : tokens) s.tokens.push_back(to_lower(t));
  for (EntityId e : entities) {
    if (std::find(s.entities.begin(), s.entities.end(), e) != s.entities.end()) continue;
    s.entities.push_back(e);
    by_entity_[e].push_back(id);
  }
  sentences_.emplace(id, std::move(s));
  order_.push_back(id);
}

const std::vector<std::string>& ContextIndex::tokens(SentenceId id) const {
  auto it = sentences_.find(id);
  if (it == sentences_.end()) throw std::out_of_range("unknown sentence id " + std::to_string(id));
  return it->second.tokens;
}

std::span<const EntityId> ContextIndex::entities_of(SentenceId id) const {
  auto it = sentences_.find(id);
  if (it == sentences_.end()) throw std::out_of_range("unknown sentence id " + std::to_string(id));
  return it->second.entities;
}

std::span<const SentenceId> ContextIndex::sentences_of(EntityId entity) const {
  auto it = by_entity_.find(entity);
  if (it == by_entity_.end()) return {};
  return it->second;
}

}  // namespace scidraft::kg
