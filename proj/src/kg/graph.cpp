#include "scidraft/kg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "scidraft/error.hpp"

namespace scidraft::kg {

std::optional<EntityType> parse_entity_type(std::string_view text) {
  const std::string lower = to_lower(text);
  if (lower == "disease") return EntityType::Disease;
  if (lower == "chemical") return EntityType::Chemical;
  if (lower == "gene") return EntityType::Gene;
  return std::nullopt;
}

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::Disease:
      return "Disease";
    case EntityType::Chemical:
      return "Chemical";
    case EntityType::Gene:
      return "Gene";
  }
  return "Disease";
}

std::size_t KnowledgeGraph::TripleKeyHash::operator()(
    const std::tuple<EntityId, RelationId, EntityId>& k) const noexcept {
  std::uint64_t h = std::get<0>(k);
  h = h * 0x9E3779B97F4A7C15ULL ^ std::get<1>(k);
  h = h * 0x9E3779B97F4A7C15ULL ^ std::get<2>(k);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

EntityId KnowledgeGraph::add_entity(std::string_view external_id, std::string_view name, EntityType type) {
  const std::string key(external_id);
  if (auto it = entity_by_external_.find(key); it != entity_by_external_.end()) {
    const Entity& known = entities_[it->second];
    if (known.type != type) {
      throw DataError("entity " + key + " declared as both " + std::string(to_string(known.type)) + " and " +
                      std::string(to_string(type)));
    }
    return it->second;
  }
  const auto id = static_cast<EntityId>(entities_.size());
  entities_.push_back(Entity{id, std::string(name), type, key});
  outgoing_.emplace_back();
  entity_by_external_.emplace(key, id);
  return id;
}

RelationId KnowledgeGraph::add_relation(std::string_view name) {
  const std::string key(name);
  if (auto it = relation_by_name_.find(key); it != relation_by_name_.end()) return it->second;
  const auto id = static_cast<RelationId>(relations_.size());
  relations_.push_back(Relation{id, key});
  relation_by_name_.emplace(key, id);
  return id;
}

bool KnowledgeGraph::add_triple(EntityId head, RelationId relation, EntityId tail, double confidence) {
  if (head >= entities_.size() || tail >= entities_.size() || relation >= relations_.size()) {
    throw std::out_of_range("triple references an unknown entity or relation");
  }
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw DataError("triple confidence " + std::to_string(confidence) + " outside [0, 1]");
  }
  const auto [it, inserted] = triple_index_.emplace(std::make_tuple(head, relation, tail), triples_.size());
  if (!inserted) return false;
  triples_.push_back(Triple{head, relation, tail, confidence});
  outgoing_[head].push_back(triples_.size() - 1);
  return true;
}

const Entity& KnowledgeGraph::entity(EntityId id) const {
  if (id >= entities_.size()) throw std::out_of_range("unknown entity id " + std::to_string(id));
  return entities_[id];
}

const Relation& KnowledgeGraph::relation(RelationId id) const {
  if (id >= relations_.size()) throw std::out_of_range("unknown relation id " + std::to_string(id));
  return relations_[id];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view external_id) const {
  if (auto it = entity_by_external_.find(std::string(external_id)); it != entity_by_external_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  if (auto it = relation_by_name_.find(std::string(name)); it != relation_by_name_.end()) return it->second;
  return std::nullopt;
}

bool KnowledgeGraph::contains(EntityId head, RelationId relation, EntityId tail) const {
  return triple_index_.contains(std::make_tuple(head, relation, tail));
}

std::vector<Edge> KnowledgeGraph::neighbors(EntityId e) const {
  if (e >= entities_.size()) throw std::out_of_range("unknown entity id " + std::to_string(e));
  std::vector<Edge> out;
  out.reserve(outgoing_[e].size());
  for (std::size_t t : outgoing_[e]) out.push_back(Edge{triples_[t].relation, triples_[t].tail, triples_[t].confidence});
  return out;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
  auto same_entities = std::equal(entities_.begin(), entities_.end(), other.entities_.begin(), other.entities_.end(),
                                  [](const Entity& a, const Entity& b) {
                                    return a.id == b.id && a.name == b.name && a.type == b.type &&
                                           a.external_id == b.external_id;
                                  });
  auto same_relations =
      std::equal(relations_.begin(), relations_.end(), other.relations_.begin(), other.relations_.end(),
                 [](const Relation& a, const Relation& b) { return a.id == b.id && a.name == b.name; });
  return same_entities && same_relations && triples_ == other.triples_;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string token; in >> token;) out.push_back(std::move(token));
  return out;
}

std::vector<std::string> name_tokens(const Entity& entity) { return split_whitespace(to_lower(entity.name)); }

}  // namespace scidraft::kg
