#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scidraft/kg/graph.hpp"

namespace scidraft::kg {

using SentenceId = std::int64_t;

// Sentences that mention each entity, for contextual entity encoding.
class ContextIndex {
 public:
  // Tokens are lowercased; duplicate entity mentions collapse. Throws
  // DataError on a repeated sentence id.
  void add_sentence(SentenceId id, std::vector<std::string> tokens, std::span<const EntityId> entities);

  bool contains(SentenceId id) const { return sentences_.contains(id); }
  const std::vector<std::string>& tokens(SentenceId id) const;
  std::span<const EntityId> entities_of(SentenceId id) const;
  // Empty for entities without context.
  std::span<const SentenceId> sentences_of(EntityId entity) const;

  // Sentence ids in insertion order.
  std::span<const SentenceId> sentence_ids() const noexcept { return order_; }
  std::size_t sentence_count() const noexcept { return order_.size(); }

  bool operator==(const ContextIndex& other) const = default;

 private:
  struct Sentence {
    std::vector<std::string> tokens;
    std::vector<EntityId> entities;
    bool operator==(const Sentence&) const = default;
  };
  std::unordered_map<SentenceId, Sentence> sentences_;
  std::unordered_map<EntityId, std::vector<SentenceId>> by_entity_;
  std::vector<SentenceId> order_;
};

}  // namespace scidraft::kg
