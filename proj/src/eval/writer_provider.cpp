#include "scidraft/eval/writer_provider.hpp"

#include <cmath>

#include "scidraft/writer/decoder.hpp"

namespace scidraft::eval {

std::vector<long double> WriterProvider::gold_log_probabilities(std::size_t sequence) const {
  const writer::WriterExample& example = examples_[sequence];
  const writer::PreparedExample prepared = writer::prepare_example(model_, example);
  const writer::DecoderSession session(model_, example.source, example.entities);
  writer::DecoderState state = session.initial_state();
  std::vector<long double> out;
  for (writer::TokenId gold : prepared.targets) {
    const writer::StepDistribution step = session.step(state);
    out.push_back(std::log(static_cast<long double>(step.probabilities[gold])));
    state = session.advance(state, step, gold);
  }
  return out;
}

}  // namespace scidraft::eval
