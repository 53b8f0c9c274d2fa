#include "scidraft/writer/corpus.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

#include "scidraft/error.hpp"

namespace scidraft::writer {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> out;
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  for (std::string word : split_words(text)) {
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::size_t begin = 0, end = word.size();
    while (begin < end && punct(word[begin])) ++begin;
    while (end > begin && punct(word[end - 1])) --end;
    if (begin == end) {
      for (char c : word) out.emplace_back(1, c);
      continue;
    }
    for (std::size_t i = 0; i < begin; ++i) out.emplace_back(1, word[i]);
    out.push_back(word.substr(begin, end - begin));
    for (std::size_t i = end; i < word.size(); ++i) out.emplace_back(1, word[i]);
  }
  return out;
}

namespace {

std::vector<std::string> words_field(const nlohmann::json& record, const char* key, const std::string& where) {
  if (!record.contains(key)) throw DataError(where + ": missing \"" + key + "\"");
  const auto& v = record.at(key);
  if (v.is_string()) return split_words(v.get<std::string>());
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& t : v) {
      if (!t.is_string()) throw DataError(where + ": \"" + key + "\" must hold strings");
      out.push_back(t.get<std::string>());
    }
    return out;
  }
  throw DataError(where + ": \"" + key + "\" must be a string or an array of strings");
}

}  // namespace

std::vector<CorpusPair> read_corpus(std::istream& in, std::string_view source) {
  std::vector<CorpusPair> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(number);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw DataError(where + ": expected a JSON object");
    CorpusPair pair;
    pair.source = words_field(record, "src", where);
    pair.target = words_field(record, "tgt", where);
    if (pair.source.empty()) throw DataError(where + ": empty \"src\"");
    if (record.contains("entities")) pair.entities = words_field(record, "entities", where);
    out.push_back(std::move(pair));
  }
  return out;
}

void write_corpus(std::ostream& out, std::span<const CorpusPair> pairs) {
  for (const auto& p : pairs) {
    nlohmann::json j{{"src", p.source}, {"tgt", p.target}};
    if (!p.entities.empty()) j["entities"] = p.entities;
    out << j.dump() << '\n';
  }
}

std::vector<WriterExample> to_examples(std::span<const CorpusPair> pairs, const kg::KnowledgeGraph& graph) {
  std::vector<WriterExample> out;
  for (const auto& p : pairs) {
    WriterExample e{p.source, p.target, {}};
    for (const auto& ext : p.entities) {
      const auto id = graph.find_entity(ext);
      if (!id) throw DataError("corpus refers to unknown entity " + ext);
      e.entities.push_back(EntityMemory{*id, kg::name_tokens(graph.entity(*id))});
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace scidraft::writer
