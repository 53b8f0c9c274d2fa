#pragma once

// Papers file, one JSON object per line:
//   {"id": "P1", "title": "...", "abstract": "...", "conclusion": "...", "cites": ["P7"]}
// conclusion and cites are optional.

#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scidraft/writer/corpus.hpp"

namespace scidraft::cli {

struct Paper {
  std::string id;
  std::string title;
  std::string abstract;
  std::string conclusion;
  std::vector<std::string> cites;
};

// Throws DataError naming source and line for malformed records or duplicate ids.
std::vector<Paper> read_papers(std::istream& in, std::string_view source = "<papers>");

struct TaskCorpora {
  std::vector<writer::CorpusPair> title2abstract;
  std::vector<writer::CorpusPair> abstract2conclusion;
  std::vector<writer::CorpusPair> conclusion2title;
  std::vector<std::string> warnings;
};

// When any paper lists citations, a paper A citing B yields the pair
// (conclusion of B -> title of A); otherwise each paper pairs its own
// conclusion with its own title. Papers without a conclusion are skipped for
// the tasks that need one.
TaskCorpora build_task_corpora(std::span<const Paper> papers);

}  // namespace scidraft::cli
