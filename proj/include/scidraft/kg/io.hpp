#pragma once

// Line-oriented graph and context files.
//
// Triples (UTF-8, tab separated, '#' starts a comment line):
//   head_external_id  head_name  head_type  relation  tail_external_id  tail_name  tail_type  [confidence]
// Types are Disease, Chemical or Gene. The optional eighth column is written
// by write_graph and defaults to 1 when absent.
//
// Sentences: one JSON object per line,
//   {"sid": 12, "tokens": ["zinc", "binds", "cd14"], "entities": ["D015032"]}

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "scidraft/kg/context.hpp"
#include "scidraft/kg/graph.hpp"

namespace scidraft::kg {

// Throws DataError naming source and line for malformed records.
KnowledgeGraph read_triples(std::istream& in, std::string_view source = "<triples>");
void write_graph(std::ostream& out, const KnowledgeGraph& graph);

// Mentions of unknown external ids are skipped with a warning appended to
// warnings (when non-null).
ContextIndex read_sentences(std::istream& in, const KnowledgeGraph& graph, std::vector<std::string>* warnings,
                            std::string_view source = "<sentences>");
void write_sentences(std::ostream& out, const ContextIndex& index, const KnowledgeGraph& graph);

}  // namespace scidraft::kg
