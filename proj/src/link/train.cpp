#include "scidraft/link/train.hpp"

#include <numeric>

#include "scidraft/error.hpp"
#include "scidraft/numerics/ops.hpp"

namespace scidraft::link {

namespace nx = scidraft::numerics;

namespace {

constexpr int kAttempts = 32;

bool try_pool(const kg::KnowledgeGraph& graph, const kg::Triple& gold, bool replace_head,
              const std::vector<EntityId>& pool, nx::Rng& rng, kg::Triple& corrupted) {
  if (pool.empty()) return false;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    kg::Triple candidate = gold;
    (replace_head ? candidate.head : candidate.tail) = pool[rng.index(pool.size())];
    if (!graph.contains(candidate.head, candidate.relation, candidate.tail)) {
      corrupted = candidate;
      return true;
    }
  }
  return false;
}

}  // namespace

CorruptionSampler::CorruptionSampler(const kg::KnowledgeGraph& graph) : graph_(graph) {
  for (const kg::Entity& e : graph.entities()) {
    all_.push_back(e.id);
    by_type_[e.type].push_back(e.id);
  }
}

bool CorruptionSampler::corrupt(const kg::Triple& gold, nx::Rng& rng, kg::Triple& corrupted) const {
  const bool replace_head = rng.coin();
  const auto& same = by_type_.at(graph_.entity(replace_head ? gold.head : gold.tail).type);
  return try_pool(graph_, gold, replace_head, same, rng, corrupted) ||
         try_pool(graph_, gold, replace_head, all_, rng, corrupted);
}

LinkTrainReport train_margin(LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                             const kg::ContextIndex& context, const LinkTrainOptions& options) {
  if (graph.triple_count() == 0) throw DataError("link prediction needs at least one triple");
  if (options.batch_size == 0) throw std::invalid_argument("link batch size must be positive");

  nx::Rng rng(options.seed);
  nx::Adam adam(params.parameters(), options.adam);
  LinkTrainReport report;
  std::vector<std::size_t> order(graph.triple_count());
  std::iota(order.begin(), order.end(), 0);
  const double margin = params.config().margin;
  const CorruptionSampler sampler(graph);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      nx::Tape tape;
      EntityEncoder encoder(tape, params, graph, context);
      std::vector<nx::Var> losses;
      for (std::size_t k = begin; k < end; ++k) {
        const kg::Triple& gold = graph.triples()[order[k]];
        kg::Triple corrupted;
        if (!sampler.corrupt(gold, rng, corrupted)) continue;
        const nx::Var gold_score = encoder.score(encoder.combined(gold.head), gold.relation, encoder.combined(gold.tail));
        const nx::Var bad_score =
            encoder.score(encoder.combined(corrupted.head), corrupted.relation, encoder.combined(corrupted.tail));
        const nx::Var hinge = nx::relu(nx::add_scalar(nx::sub(bad_score, gold_score), margin));
        losses.push_back(hinge);
        if (options.on_sample) {
          options.on_sample(MarginSample{gold, corrupted, gold_score.item(), bad_score.item(), hinge.item()});
        }
      }
      if (losses.empty()) continue;
      nx::Var total = losses.front();
      for (std::size_t i = 1; i < losses.size(); ++i) total = nx::add(total, losses[i]);
      const double batch_loss = total.item();
      epoch_loss += batch_loss;
      if (batch_loss == 0.0) continue;
      adam.zero_grad();
      tape.backward(total);
      adam.step();
    }
    report.epoch_loss.push_back(epoch_loss);
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss);
  }
  report.optimizer_steps = adam.steps_taken();
  return report;
}

}  // namespace scidraft::link
