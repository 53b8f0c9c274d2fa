#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scidraft/kg/graph.hpp"
#include "scidraft/link/model.hpp"

namespace scidraft::link {

// One round of neighbour propagation. For every unordered pair of entities
// whose combined vectors have cosine similarity >= threshold, each gains the
// other's outgoing edges it lacks, with confidence equal to the similarity
// (the maximum when several pairs propose the same edge). Self-loops are not
// created. Original triples are kept as they are; new ones are appended in
// (head, relation, tail) order. Throws std::invalid_argument unless
// 0 < threshold <= 1 and reps has one entry per entity.
kg::KnowledgeGraph propagate_links(const kg::KnowledgeGraph& graph, std::span<const EntityRepresentation> reps,
                                   double threshold);

struct RelatedEntity {
  EntityId entity = 0;
  double confidence = 0.0;

  bool operator==(const RelatedEntity&) const = default;
};

// Outgoing neighbours of the title entities, excluding the title entities,
// scored by their best edge confidence. Sorted by confidence descending then
// id ascending and truncated to limit (>= 1).
std::vector<RelatedEntity> related_entities(std::span<const EntityId> title_entities,
                                            const kg::KnowledgeGraph& enriched, std::size_t limit = 10);

}  // namespace scidraft::link
