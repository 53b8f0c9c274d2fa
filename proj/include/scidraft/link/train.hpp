#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "scidraft/kg/context.hpp"
#include "scidraft/kg/graph.hpp"
#include "scidraft/link/model.hpp"
#include "scidraft/numerics/adam.hpp"

namespace scidraft::link {

struct MarginSample {
  kg::Triple gold;
  kg::Triple corrupted;
  double gold_score = 0.0;
  double corrupted_score = 0.0;
  double loss = 0.0;
};

struct LinkTrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  numerics::AdamOptions adam;
  // Observers, called in training order.
  std::function<void(const MarginSample&)> on_sample;
  std::function<void(std::size_t epoch, double loss)> on_epoch;
};

struct LinkTrainReport {
  std::vector<double> epoch_loss;  // summed hinge loss per epoch
  std::size_t optimizer_steps = 0;
};

// Replaces the head or the tail (fair coin) with a random entity of the same
// type, resampling while the result is a stored triple. Falls back to any
// entity type when the same-type pool is exhausted; corrupt() returns false if
// no unseen corruption was found.
class CorruptionSampler {
 public:
  explicit CorruptionSampler(const kg::KnowledgeGraph& graph);

  bool corrupt(const kg::Triple& gold, numerics::Rng& rng, kg::Triple& corrupted) const;

 private:
  const kg::KnowledgeGraph& graph_;
  std::map<kg::EntityType, std::vector<EntityId>> by_type_;
  std::vector<EntityId> all_;
};

// Margin ranking training with Adam over shuffled minibatches. Batches whose
// loss is exactly zero leave the parameters untouched. Throws DataError for a
// graph without triples.
LinkTrainReport train_margin(LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                             const kg::ContextIndex& context, const LinkTrainOptions& options);

}  // namespace scidraft::link
