#include "scidraft/writer/chain.hpp"

#include "scidraft/error.hpp"
#include "scidraft/kg/matcher.hpp"

namespace scidraft::writer {

std::vector<EntityMemory> entity_memories(std::span<const link::RelatedEntity> related,
                                          const kg::KnowledgeGraph& graph, const WriterModel& model) {
  std::vector<EntityMemory> out;
  for (const auto& r : related) {
    if (r.entity >= model.entity_count) {
      throw DataError("entity " + graph.entity(r.entity).external_id + " is unknown to the " + model.task +
                      " model (trained with " + std::to_string(model.entity_count) + " entities)");
    }
    out.push_back(EntityMemory{r.entity, kg::name_tokens(graph.entity(r.entity))});
  }
  return out;
}

namespace {

std::vector<kg::EntityId> matched_ids(std::span<const std::string> tokens, const kg::KnowledgeGraph& graph) {
  std::vector<kg::EntityId> ids;
  for (const auto& m : kg::match_title_entities(tokens, graph)) ids.push_back(m.entity);
  return ids;
}

StageOutput run_stage(const WriterModel& model, std::span<const std::string> source,
                      std::vector<EntityMemory> entities, const TokenSets& sets, const BeamOptions& options) {
  Generation g = beam_search(model, source, std::move(entities), sets, options);
  return StageOutput{std::move(g.tokens), std::move(g.sources)};
}

}  // namespace

std::vector<link::RelatedEntity> title_related(std::span<const std::string> title, const kg::KnowledgeGraph& graph,
                                               std::size_t limit) {
  return link::related_entities(matched_ids(title, graph), graph, limit);
}

GenerationRecord generate_chain(std::span<const std::string> title, const kg::KnowledgeGraph& enriched,
                                const ChainModels& models, const TokenSets& token_sets,
                                const ChainOptions& options) {
  if (title.empty()) throw DataError("cannot generate from an empty title");
  GenerationRecord record;
  record.title.assign(title.begin(), title.end());
  record.title_entities = matched_ids(title, enriched);
  record.related = link::related_entities(record.title_entities, enriched, options.related_limit);

  auto halt = [&](const char* stage) {
    record.error = std::string("stage '") + stage + "' produced no output";
    return record;
  };

  record.abstract = run_stage(models.title_to_abstract, record.title,
                              entity_memories(record.related, enriched, models.title_to_abstract), token_sets,
                              options.beam);
  if (record.abstract.tokens.empty()) return halt("abstract");
  record.conclusion = run_stage(models.abstract_to_conclusion, record.abstract.tokens, {}, token_sets, options.beam);
  if (record.conclusion.tokens.empty()) return halt("conclusion");
  record.new_title = run_stage(models.conclusion_to_title, record.conclusion.tokens, {}, token_sets, options.beam);
  if (record.new_title.tokens.empty()) return halt("new_title");

  if (options.second_abstract) {
    record.new_title_entities = matched_ids(record.new_title.tokens, enriched);
    record.new_related = link::related_entities(record.new_title_entities, enriched, options.related_limit);
    record.second_abstract = run_stage(models.title_to_abstract, record.new_title.tokens,
                                       entity_memories(record.new_related, enriched, models.title_to_abstract),
                                       token_sets, options.beam);
    if (record.second_abstract.tokens.empty()) return halt("second_abstract");
  }
  record.complete = true;
  return record;
}

namespace {

nlohmann::json stage_json(const StageOutput& stage) {
  std::string text;
  for (const auto& t : stage.tokens) text += (text.empty() ? "" : " ") + t;
  auto sources = nlohmann::json::array();
  for (TokenSource s : stage.sources) sources.push_back(std::string(to_string(s)));
  return {{"text", text}, {"tokens", stage.tokens}, {"sources", sources}};
}

nlohmann::json entities_json(std::span<const kg::EntityId> ids, const kg::KnowledgeGraph& graph) {
  auto out = nlohmann::json::array();
  for (kg::EntityId id : ids) {
    const auto& e = graph.entity(id);
    out.push_back({{"id", e.external_id}, {"name", e.name}, {"type", std::string(kg::to_string(e.type))}});
  }
  return out;
}

nlohmann::json related_json(std::span<const link::RelatedEntity> related, const kg::KnowledgeGraph& graph) {
  auto out = nlohmann::json::array();
  for (const auto& r : related) {
    const auto& e = graph.entity(r.entity);
    out.push_back({{"id", e.external_id}, {"name", e.name}, {"confidence", r.confidence}});
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const GenerationRecord& record, const kg::KnowledgeGraph& graph) {
  nlohmann::json j;
  j["title"] = stage_json(StageOutput{record.title, {}})["text"];
  j["title_entities"] = entities_json(record.title_entities, graph);
  j["related_entities"] = related_json(record.related, graph);
  j["abstract"] = stage_json(record.abstract);
  j["conclusion_future_work"] = stage_json(record.conclusion);
  j["new_title"] = stage_json(record.new_title);
  j["new_title_entities"] = entities_json(record.new_title_entities, graph);
  j["new_related_entities"] = related_json(record.new_related, graph);
  j["second_abstract"] = stage_json(record.second_abstract);
  j["complete"] = record.complete;
  j["error"] = record.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(record.error);
  return j;
}

}  // namespace scidraft::writer
