#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scidraft/writer/model.hpp"
#include "scidraft/writer/network.hpp"
#include "scidraft/writer/vocab.hpp"

namespace scidraft::writer {

enum class TokenSource { Generate, CopyTitle, CopyEntity };

std::string_view to_string(TokenSource source);

struct DecoderState {
  std::size_t step = 0;
  Tensor hidden;
  Tensor reference_coverage;  // running sum of reference attention
  Tensor entity_coverage;     // running sum of entity attention (empty without entities)
  TokenId previous = kBos;
  std::vector<TokenId> output;
};

struct StepDistribution {
  Tensor probabilities;  // over the copy layout
  // Weighted contribution of each branch; they add up to probabilities.
  Tensor generated;
  Tensor copied_reference;
  Tensor copied_entity;
  Tensor attention;       // over reference positions
  Tensor entity_weights;  // over entities
  double gate = 0.0;
  double copy_gate = 1.0;
  Tensor hidden;

  // Branch with the largest contribution to id.
  TokenSource source_of(TokenId id) const;
};

// Step-by-step decoding against fixed parameters. Read-only over the model,
// so several sessions may share one model across threads.
class DecoderSession {
 public:
  DecoderSession(const WriterModel& model, std::span<const std::string> source, std::vector<EntityMemory> entities,
                 GateOverride pinned = {});

  const CopyLayout& layout() const noexcept { return layout_; }
  std::size_t source_length() const noexcept { return source_.size(); }

  DecoderState initial_state() const;
  StepDistribution step(const DecoderState& state) const;
  DecoderState advance(const DecoderState& state, const StepDistribution& step, TokenId chosen) const;

 private:
  const WriterModel& model_;
  std::vector<std::string> source_;
  std::vector<EntityMemory> entities_;
  CopyLayout layout_;
  GateOverride pinned_;
  Tensor states_;
  Tensor keys_;
  Tensor initial_hidden_;
  Tensor memory_;
  std::vector<Tensor> memory_keys_;
};

struct BeamOptions {
  std::size_t beam = 4;
  std::size_t max_len = 120;
  bool mask_repeats = true;
  GateOverride pinned;
};

struct Generation {
  std::vector<std::string> tokens;
  std::vector<TokenId> ids;
  std::vector<TokenSource> sources;
  double log_probability = 0.0;
  double score = 0.0;  // log-probability per emitted token, end marker included
};

// Beam search ranked by length-normalised log-probability, ties broken by the
// lexicographically smaller id sequence. A token outside the stop-word and
// punctuation sets is never emitted twice when mask_repeats is set. The end
// marker is not allowed as the first token; padding and the start marker are
// never emitted. If every token is excluded, the most probable stop word is
// taken, or the end marker when no stop word has probability.
Generation beam_search(const WriterModel& model, std::span<const std::string> source,
                       std::vector<EntityMemory> entities, const TokenSets& token_sets, const BeamOptions& options);

}  // namespace scidraft::writer
