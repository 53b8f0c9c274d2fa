#include "scidraft/writer/train.hpp"

#include <cmath>
#include <numeric>

#include "scidraft/error.hpp"

namespace scidraft::writer {

namespace nx = scidraft::numerics;

Vocabulary build_writer_vocab(std::span<const WriterExample> examples, std::size_t min_count) {
  std::vector<std::vector<std::string>> texts;
  for (const auto& e : examples) {
    texts.push_back(e.source);
    texts.push_back(e.target);
  }
  return Vocabulary::build(texts, min_count);
}

WriterTrainReport train_writer(WriterModel& model, std::span<const WriterExample> examples,
                               const WriterTrainOptions& options) {
  if (examples.empty()) throw DataError("writer training needs at least one example");
  std::vector<PreparedExample> prepared;
  prepared.reserve(examples.size());
  for (const auto& e : examples) prepared.push_back(prepare_example(model, e));

  nx::Rng rng(options.seed);
  nx::Adam adam(model.params.parameters(), options.adam);
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);
  WriterTrainReport report;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0, nll_sum = 0.0;
    std::size_t tokens = 0;
    for (std::size_t index : order) {
      nx::Tape tape;
      WriterNet net(tape, model.params);
      const SequenceLoss loss = sequence_loss(net, model.config, prepared[index]);
      loss_sum += loss.total.item();
      nll_sum += loss.nll.item();
      tokens += loss.tokens;
      adam.zero_grad();
      tape.backward(loss.total);
      adam.step();
    }
    WriterEpoch summary{epoch, loss_sum / static_cast<double>(prepared.size()),
                        std::exp(nll_sum / static_cast<double>(tokens))};
    report.epochs.push_back(summary);
    if (options.on_epoch) options.on_epoch(summary);
    if (options.target_perplexity > 0.0 && summary.perplexity < options.target_perplexity) break;
  }
  report.optimizer_steps = adam.steps_taken();
  report.final_perplexity = corpus_perplexity(model, examples);
  return report;
}

double corpus_perplexity(const WriterModel& model, std::span<const WriterExample> examples) {
  if (examples.empty()) throw DataError("perplexity needs at least one example");
  long double nll = 0.0L;
  std::size_t tokens = 0;
  for (const auto& e : examples) {
    const PreparedExample prepared = prepare_example(model, e);
    nx::Tape tape;
    WriterNet net(tape, model.params);
    const SequenceLoss loss = sequence_loss(net, model.config, prepared);
    nll += loss.nll.item();
    tokens += loss.tokens;
  }
  return static_cast<double>(std::exp(nll / static_cast<long double>(tokens)));
}

}  // namespace scidraft::writer
