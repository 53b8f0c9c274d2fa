#pragma once

// Writer training pairs, one JSON object per line:
//   {"src": "zinc binds cd14", "tgt": "we show ...", "entities": ["D015032"]}
// src and tgt are whitespace-tokenized strings or token arrays; entities is
// optional and lists external ids of related knowledge-graph entities.

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scidraft/kg/graph.hpp"
#include "scidraft/writer/network.hpp"

namespace scidraft::writer {

struct CorpusPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::vector<std::string> entities;
};

// Throws DataError naming source and line for malformed records.
std::vector<CorpusPair> read_corpus(std::istream& in, std::string_view source = "<corpus>");
void write_corpus(std::ostream& out, std::span<const CorpusPair> pairs);

// Resolves entity ids against the graph; unknown ids raise DataError.
std::vector<WriterExample> to_examples(std::span<const CorpusPair> pairs, const kg::KnowledgeGraph& graph);

std::vector<std::string> split_words(std::string_view text);

// Lowercases ASCII letters and splits on whitespace, peeling leading and
// trailing punctuation into tokens of their own ("(zinc)." -> "(", "zinc", ")", ".").
std::vector<std::string> tokenize_text(std::string_view text);

}  // namespace scidraft::writer
