#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scidraft/kg/graph.hpp"
#include "scidraft/link/enrich.hpp"
#include "scidraft/writer/decoder.hpp"
#include "scidraft/writer/model.hpp"

namespace scidraft::writer {

// Writer-side memory entries for related entities; throws DataError when an
// entity lies outside the model's entity table.
std::vector<EntityMemory> entity_memories(std::span<const link::RelatedEntity> related,
                                          const kg::KnowledgeGraph& graph, const WriterModel& model);

// Related entities of whatever graph entities a title mentions.
std::vector<link::RelatedEntity> title_related(std::span<const std::string> title, const kg::KnowledgeGraph& graph,
                                               std::size_t limit);

struct ChainModels {
  const WriterModel& title_to_abstract;
  const WriterModel& abstract_to_conclusion;
  const WriterModel& conclusion_to_title;
};

struct ChainOptions {
  BeamOptions beam;
  std::size_t related_limit = 10;
  bool second_abstract = true;
};

struct StageOutput {
  std::vector<std::string> tokens;
  std::vector<TokenSource> sources;
};

struct GenerationRecord {
  std::vector<std::string> title;
  std::vector<kg::EntityId> title_entities;
  std::vector<link::RelatedEntity> related;
  StageOutput abstract;
  StageOutput conclusion;
  StageOutput new_title;
  std::vector<kg::EntityId> new_title_entities;
  std::vector<link::RelatedEntity> new_related;
  StageOutput second_abstract;
  bool complete = false;
  std::string error;  // set when a stage produced nothing
};

// Title -> abstract -> conclusion and future work -> follow-on title, and
// optionally the follow-on title's abstract with freshly retrieved related
// entities. Each stage reads the previous stage's output. Throws DataError
// for an empty title.
GenerationRecord generate_chain(std::span<const std::string> title, const kg::KnowledgeGraph& enriched,
                                const ChainModels& models, const TokenSets& token_sets,
                                const ChainOptions& options);

nlohmann::json to_json(const GenerationRecord& record, const kg::KnowledgeGraph& graph);

}  // namespace scidraft::writer
