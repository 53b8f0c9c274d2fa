#pragma once

#include <span>
#include <vector>

#include "scidraft/eval/metrics.hpp"
#include "scidraft/writer/model.hpp"
#include "scidraft/writer/network.hpp"

namespace scidraft::eval {

// Teacher-forced gold-token probabilities of a writer model on its pairs.
class WriterProvider : public TokenDistributionProvider {
 public:
  WriterProvider(const writer::WriterModel& model, std::span<const writer::WriterExample> examples)
      : model_(model), examples_(examples) {}

  std::size_t sequence_count() const override { return examples_.size(); }
  std::vector<long double> gold_log_probabilities(std::size_t sequence) const override;

 private:
  const writer::WriterModel& model_;
  std::span<const writer::WriterExample> examples_;
};

}  // namespace scidraft::eval
