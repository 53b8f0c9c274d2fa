#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace scidraft::kg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

enum class EntityType { Disease, Chemical, Gene };

std::optional<EntityType> parse_entity_type(std::string_view text);
std::string_view to_string(EntityType type);

struct Entity {
  EntityId id = 0;
  std::string name;
  EntityType type = EntityType::Disease;
  std::string external_id;
};

struct Relation {
  RelationId id = 0;
  std::string name;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  // 1 for extracted triples, the propagating similarity for predicted ones.
  double confidence = 1.0;

  bool operator==(const Triple&) const = default;
};

// Outgoing edge as returned by KnowledgeGraph::neighbors.
struct Edge {
  RelationId relation = 0;
  EntityId tail = 0;
  double confidence = 1.0;

  bool operator==(const Edge&) const = default;
};

// Directed multi-relational graph. Entity and relation ids are dense and
// assigned in first-seen order; triples are unique on (head, relation, tail).
class KnowledgeGraph {
 public:
  // Returns the existing id when external_id is known; throws DataError if the
  // known entity has a different type.
  EntityId add_entity(std::string_view external_id, std::string_view name, EntityType type);
  RelationId add_relation(std::string_view name);
  // Returns false (and leaves the graph unchanged) for a duplicate triple.
  bool add_triple(EntityId head, RelationId relation, EntityId tail, double confidence = 1.0);

  std::span<const Entity> entities() const noexcept { return entities_; }
  std::span<const Relation> relations() const noexcept { return relations_; }
  std::span<const Triple> triples() const noexcept { return triples_; }

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t triple_count() const noexcept { return triples_.size(); }

  const Entity& entity(EntityId id) const;
  const Relation& relation(RelationId id) const;
  std::optional<EntityId> find_entity(std::string_view external_id) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  bool contains(EntityId head, RelationId relation, EntityId tail) const;

  // Stored outgoing edges of e in insertion order; throws std::out_of_range
  // for an unknown id.
  std::vector<Edge> neighbors(EntityId e) const;

  bool operator==(const KnowledgeGraph& other) const;

 private:
  struct TripleKeyHash {
    std::size_t operator()(const std::tuple<EntityId, RelationId, EntityId>& k) const noexcept;
  };

  std::vector<Entity> entities_;
  std::vector<Relation> relations_;
  std::vector<Triple> triples_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::unordered_map<std::string, EntityId> entity_by_external_;
  std::unordered_map<std::string, RelationId> relation_by_name_;
  std::unordered_map<std::tuple<EntityId, RelationId, EntityId>, std::size_t, TripleKeyHash> triple_index_;
};

// Lowercased whitespace tokens of an entity's surface name.
std::vector<std::string> name_tokens(const Entity& entity);

std::string to_lower(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace scidraft::kg
