#include "scidraft/kg/io.hpp"

#include <charconv>
#include <json.hpp>

#include "scidraft/error.hpp"

namespace scidraft::kg {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string located(std::string_view source, std::size_t line, const std::string& message) {
  return std::string(source) + ":" + std::to_string(line) + ": " + message;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace

KnowledgeGraph read_triples(std::istream& in, std::string_view source) {
  KnowledgeGraph graph;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 7 && fields.size() != 8) {
      throw DataError(located(source, number, "expected 7 or 8 tab-separated columns, found " +
                                                  std::to_string(fields.size())));
    }
    for (std::size_t i = 0; i < 7; ++i) {
      if (fields[i].empty()) throw DataError(located(source, number, "column " + std::to_string(i + 1) + " is empty"));
    }
    const auto head_type = parse_entity_type(fields[2]);
    const auto tail_type = parse_entity_type(fields[6]);
    if (!head_type || !tail_type) {
      const auto bad = !head_type ? fields[2] : fields[6];
      throw DataError(located(source, number, "unknown entity type '" + std::string(bad) + "'"));
    }
    double confidence = 1.0;
    if (fields.size() == 8) {
      const auto text = fields[7];
      const auto result = std::from_chars(text.data(), text.data() + text.size(), confidence);
      if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        throw DataError(located(source, number, "confidence '" + std::string(text) + "' is not a number"));
      }
    }
    try {
      const EntityId head = graph.add_entity(fields[0], fields[1], *head_type);
      const RelationId relation = graph.add_relation(fields[3]);
      const EntityId tail = graph.add_entity(fields[4], fields[5], *tail_type);
      graph.add_triple(head, relation, tail, confidence);
    } catch (const DataError& e) {
      throw DataError(located(source, number, e.what()));
    }
  }
  return graph;
}

void write_graph(std::ostream& out, const KnowledgeGraph& graph) {
  for (const Triple& t : graph.triples()) {
    const Entity& head = graph.entity(t.head);
    const Entity& tail = graph.entity(t.tail);
    out << head.external_id << '\t' << head.name << '\t' << to_string(head.type) << '\t'
        << graph.relation(t.relation).name << '\t' << tail.external_id << '\t' << tail.name << '\t'
        << to_string(tail.type) << '\t' << format_double(t.confidence) << '\n';
  }
}

ContextIndex read_sentences(std::istream& in, const KnowledgeGraph& graph, std::vector<std::string>* warnings,
                            std::string_view source) {
  ContextIndex index;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(located(source, number, std::string("invalid JSON: ") + e.what()));
    }
    SentenceId sid = 0;
    std::vector<std::string> tokens, mentions;
    try {
      sid = record.at("sid").get<SentenceId>();
      tokens = record.at("tokens").get<std::vector<std::string>>();
      mentions = record.at("entities").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(located(source, number, std::string("malformed sentence record: ") + e.what()));
    }
    std::vector<EntityId> entities;
    for (const auto& external : mentions) {
      if (auto id = graph.find_entity(external)) {
        entities.push_back(*id);
      } else if (warnings) {
        warnings->push_back(located(source, number, "unknown entity '" + external + "' skipped"));
      }
    }
    try {
      index.add_sentence(sid, std::move(tokens), entities);
    } catch (const DataError& e) {
      throw DataError(located(source, number, e.what()));
    }
  }
  return index;
}

void write_sentences(std::ostream& out, const ContextIndex& index, const KnowledgeGraph& graph) {
  for (SentenceId sid : index.sentence_ids()) {
    nlohmann::json record;
    record["sid"] = sid;
    record["tokens"] = index.tokens(sid);
    auto mentions = nlohmann::json::array();
    for (EntityId e : index.entities_of(sid)) mentions.push_back(graph.entity(e).external_id);
    record["entities"] = std::move(mentions);
    out << record.dump() << '\n';
  }
}

}  // namespace scidraft::kg
