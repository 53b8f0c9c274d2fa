#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scidraft/numerics/adam.hpp"
#include "scidraft/writer/model.hpp"
#include "scidraft/writer/network.hpp"

namespace scidraft::writer {

struct WriterEpoch {
  std::size_t epoch = 0;
  double mean_loss = 0.0;   // per example, coverage included
  double perplexity = 0.0;  // per token over the epoch, as the weights moved
};

struct WriterTrainOptions {
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  numerics::AdamOptions adam;
  // Stop once an epoch's running perplexity falls below this; 0 disables.
  double target_perplexity = 0.0;
  std::function<void(const WriterEpoch&)> on_epoch;
};

struct WriterTrainReport {
  std::vector<WriterEpoch> epochs;
  // Per-token perplexity of the final weights on the training pairs.
  double final_perplexity = 0.0;
  std::size_t optimizer_steps = 0;
};

// Vocabulary over sources and targets, keeping words seen at least min_count times.
Vocabulary build_writer_vocab(std::span<const WriterExample> examples, std::size_t min_count);

// Adam on one example at a time, in a seeded shuffled order each epoch.
// Throws DataError for an empty corpus.
WriterTrainReport train_writer(WriterModel& model, std::span<const WriterExample> examples,
                               const WriterTrainOptions& options);

// Teacher-forced per-token perplexity (coverage excluded).
double corpus_perplexity(const WriterModel& model, std::span<const WriterExample> examples);

}  // namespace scidraft::writer
