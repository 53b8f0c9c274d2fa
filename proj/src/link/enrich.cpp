#include "scidraft/link/enrich.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace scidraft::link {

kg::KnowledgeGraph propagate_links(const kg::KnowledgeGraph& graph, std::span<const EntityRepresentation> reps,
                                   double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("similarity threshold must lie in (0, 1]");
  }
  if (reps.size() != graph.entity_count()) {
    throw std::invalid_argument("one representation per entity is required");
  }

  std::vector<std::vector<kg::Edge>> outgoing(graph.entity_count());
  for (std::size_t e = 0; e < graph.entity_count(); ++e) outgoing[e] = graph.neighbors(static_cast<EntityId>(e));

  std::map<std::tuple<EntityId, RelationId, EntityId>, double> proposed;
  auto transfer = [&](EntityId to, EntityId from, double similarity) {
    for (const kg::Edge& edge : outgoing[from]) {
      if (edge.tail == to || graph.contains(to, edge.relation, edge.tail)) continue;
      auto [it, inserted] = proposed.try_emplace({to, edge.relation, edge.tail}, similarity);
      if (!inserted) it->second = std::max(it->second, similarity);
    }
  };
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = a + 1; b < reps.size(); ++b) {
      const double similarity = entity_similarity(reps[a].combined, reps[b].combined);
      if (similarity < threshold) continue;
      transfer(static_cast<EntityId>(a), static_cast<EntityId>(b), similarity);
      transfer(static_cast<EntityId>(b), static_cast<EntityId>(a), similarity);
    }
  }

  kg::KnowledgeGraph enriched = graph;
  for (const auto& [key, confidence] : proposed) {
    const auto& [head, relation, tail] = key;
    enriched.add_triple(head, relation, tail, confidence);
  }
  return enriched;
}

std::vector<RelatedEntity> related_entities(std::span<const EntityId> title_entities,
                                            const kg::KnowledgeGraph& enriched, std::size_t limit) {
  if (limit == 0) throw std::invalid_argument("related entity limit must be at least 1");
  std::map<EntityId, double> best;
  for (EntityId title : title_entities) {
    for (const kg::Edge& edge : enriched.neighbors(title)) {
      auto [it, inserted] = best.try_emplace(edge.tail, edge.confidence);
      if (!inserted) it->second = std::max(it->second, edge.confidence);
    }
  }
  for (EntityId title : title_entities) best.erase(title);

  std::vector<RelatedEntity> ranked;
  for (const auto& [entity, confidence] : best) ranked.push_back({entity, confidence});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RelatedEntity& a, const RelatedEntity& b) {
    return a.confidence > b.confidence;
  });
  if (ranked.size() > limit) ranked.resize(limit);
  return ranked;
}

}  // namespace scidraft::link
