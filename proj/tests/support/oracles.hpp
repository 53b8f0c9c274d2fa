#pragma once

// Brute-force reference implementations shared by the unit suites and the
// acceptance run. Each recomputes its answer the slow, obvious way.

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "scidraft/kg/graph.hpp"
#include "scidraft/link/model.hpp"
#include "scidraft/writer/decoder.hpp"

namespace scidraft::testing {

// Percentage of distinct input n-grams found anywhere in the output, by
// scanning every window of both token lists.
inline double brute_overlap(const std::vector<std::string>& in, const std::vector<std::string>& out, std::size_t n) {
  std::vector<std::vector<std::string>> seen;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + n <= in.size(); ++i) {
    std::vector<std::string> g(in.begin() + i, in.begin() + i + n);
    if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
    seen.push_back(g);
    for (std::size_t j = 0; j + n <= out.size(); ++j) {
      if (std::equal(g.begin(), g.end(), out.begin() + j)) {
        ++hits;
        break;
      }
    }
  }
  return seen.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(seen.size());
}

using EdgeKey = std::tuple<kg::EntityId, kg::RelationId, kg::EntityId>;

// Edges that all-pairs propagation should add, with their confidence: for
// every ordered pair (x, y) at or above the threshold, x gains each edge of y
// it lacks, keeping the best similarity per edge.
inline std::map<EdgeKey, double> brute_propagation(const kg::KnowledgeGraph& graph,
                                                   std::span<const link::EntityRepresentation> reps, double threshold) {
  std::map<EdgeKey, double> expected;
  const auto n = static_cast<kg::EntityId>(graph.entity_count());
  for (kg::EntityId x = 0; x < n; ++x) {
    for (kg::EntityId y = 0; y < n; ++y) {
      if (x == y) continue;
      const double s = link::entity_similarity(reps[x].combined, reps[y].combined);
      if (s < threshold) continue;
      for (const kg::Triple& t : graph.triples()) {
        if (t.head != y || t.tail == x || graph.contains(x, t.relation, t.tail)) continue;
        auto& slot = expected[{x, t.relation, t.tail}];
        slot = std::max(slot, s);
      }
    }
  }
  return expected;
}

// Step-by-step argmax decoding under the same rules as beam search: no
// padding or start token, no end marker first, no repeated maskable word.
// Ties go to the smaller id.
inline std::vector<writer::TokenId> greedy_decode(const writer::WriterModel& model,
                                                  std::span<const std::string> source,
                                                  std::span<const writer::EntityMemory> entities,
                                                  const writer::TokenSets& sets, std::size_t max_len) {
  using writer::TokenId;
  const writer::DecoderSession session(model, source, {entities.begin(), entities.end()});
  writer::DecoderState state = session.initial_state();
  std::vector<TokenId> out;
  for (std::size_t t = 0; t < max_len; ++t) {
    const writer::StepDistribution d = session.step(state);
    TokenId best = writer::kEos;
    double best_p = -1;
    for (TokenId w = 0; w < d.probabilities.size(); ++w) {
      if (w == writer::kPad || w == writer::kBos || (w == writer::kEos && t == 0) || !(d.probabilities[w] > 0)) continue;
      const bool repeat = std::find(out.begin(), out.end(), w) != out.end();
      if (repeat && sets.maskable(session.layout().word(w))) continue;
      if (d.probabilities[w] > best_p) best_p = d.probabilities[w], best = w;
    }
    if (best == writer::kEos) break;
    out.push_back(best);
    state = session.advance(state, d, best);
  }
  return out;
}

}  // namespace scidraft::testing
