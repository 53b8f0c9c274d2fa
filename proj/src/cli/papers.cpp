#include "scidraft/cli/papers.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "scidraft/error.hpp"

namespace scidraft::cli {

std::vector<Paper> read_papers(std::istream& in, std::string_view source) {
  std::vector<Paper> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(number);
    Paper p;
    try {
      const auto j = nlohmann::json::parse(line);
      p.id = j.at("id").get<std::string>();
      p.title = j.at("title").get<std::string>();
      p.abstract = j.at("abstract").get<std::string>();
      p.conclusion = j.value("conclusion", std::string());
      if (j.contains("cites")) p.cites = j.at("cites").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (p.id.empty()) throw DataError(where + ": empty paper id");
    if (!seen.emplace(p.id, out.size()).second) throw DataError(where + ": duplicate paper id " + p.id);
    out.push_back(std::move(p));
  }
  return out;
}

TaskCorpora build_task_corpora(std::span<const Paper> papers) {
  using writer::tokenize_text;
  TaskCorpora out;
  std::map<std::string, const Paper*> by_id;
  for (const auto& p : papers) by_id[p.id] = &p;
  const bool citations = std::any_of(papers.begin(), papers.end(), [](const Paper& p) { return !p.cites.empty(); });

  for (const auto& p : papers) {
    const auto title = tokenize_text(p.title);
    const auto abstract = tokenize_text(p.abstract);
    const auto conclusion = tokenize_text(p.conclusion);
    if (!title.empty()) out.title2abstract.push_back({title, abstract, {}});
    if (!abstract.empty() && !conclusion.empty()) out.abstract2conclusion.push_back({abstract, conclusion, {}});
    if (!citations) {
      if (!conclusion.empty()) out.conclusion2title.push_back({conclusion, title, {}});
      continue;
    }
    for (const auto& cited : p.cites) {
      const auto it = by_id.find(cited);
      if (it == by_id.end()) {
        out.warnings.push_back("paper " + p.id + " cites unknown paper " + cited);
        continue;
      }
      const auto source = tokenize_text(it->second->conclusion);
      if (!source.empty()) out.conclusion2title.push_back({source, title, {}});
    }
  }
  return out;
}

}  // namespace scidraft::cli
