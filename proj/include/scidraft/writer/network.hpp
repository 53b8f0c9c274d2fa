#pragma once

// Forward computation of the writer on a tape. Training records a whole
// sequence on one tape; decoding records one step at a time on fresh tapes
// with the carried state fed back in as constants. Both go through the same
// functions below.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scidraft/numerics/tape.hpp"
#include "scidraft/writer/model.hpp"
#include "scidraft/writer/vocab.hpp"

namespace scidraft::writer {

using numerics::Var;

// A related entity as seen by the writer: its row in the entity table and the
// lowercased tokens of its name.
struct EntityMemory {
  std::size_t row = 0;
  std::vector<std::string> tokens;
};

// Output space of one example: the vocabulary extended with the source and
// entity words it lacks, so those can be copied even though they are unknown.
class CopyLayout {
 public:
  CopyLayout(const Vocabulary& vocab, std::span<const std::string> source, std::span<const EntityMemory> entities);

  std::size_t size() const noexcept { return vocab_->size() + extra_.size(); }
  std::size_t base_size() const noexcept { return vocab_->size(); }
  // Vocabulary id, extended id for a copyable unknown word, or UNK.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  // Id to feed back into the decoder: extended ids read as UNK.
  TokenId input_id(TokenId id) const { return id < vocab_->size() ? id : kUnk; }

  bool has_entities() const noexcept { return entity_count_ > 0; }
  std::size_t entity_count() const noexcept { return entity_count_; }
  const std::vector<std::size_t>& source_targets() const noexcept { return source_targets_; }
  const std::vector<std::size_t>& entity_sources() const noexcept { return entity_from_; }
  const std::vector<std::size_t>& entity_targets() const noexcept { return entity_to_; }
  const std::vector<double>& entity_weights() const noexcept { return entity_weight_; }

 private:
  TokenId intern(const std::string& word);

  const Vocabulary* vocab_;
  std::vector<std::string> extra_;
  std::unordered_map<std::string, TokenId> extra_index_;
  std::size_t entity_count_ = 0;
  std::vector<std::size_t> source_targets_;  // output id of each source position
  std::vector<std::size_t> entity_from_;     // entity index of each entity token
  std::vector<std::size_t> entity_to_;       // its output id
  std::vector<double> entity_weight_;        // 1 / number of tokens in the entity name
};

struct EncodedReference {
  Var states;  // [length, hidden], forward and backward halves per position
  Var keys;    // states projected by the reference attention weights
  Var last;    // final row of states
  std::size_t length = 0;
};

struct BoundMemory {
  std::size_t count = 0;
  Var embeddings;  // [count, hidden]
  std::vector<Var> init_keys;
  std::vector<Var> step_keys;
};

struct MemoryRead {
  Var read;     // weighted sum of entity embeddings (zero without entities)
  Var weights;  // distribution over entities (invalid without entities)
  std::vector<Var> hop_weights;  // one distribution per hop; the last equals weights
};

struct AttentionRead {
  Var context;
  Var weights;
};

// Pinned gate values, used to force pure copying in tests and diagnostics.
struct GateOverride {
  std::optional<double> generate;
  std::optional<double> copy_reference;
};

struct Mixture {
  Var generate;         // P_gen over the layout (zero on extended ids)
  Var reference;        // copy distribution from the reference
  Var entity;           // copy distribution from the entities (invalid without entities)
  Var gate;             // probability of generating
  Var copy_gate;        // probability of copying from the reference given a copy
  Var distribution;     // final mixture over the layout
};

class WriterNet {
 public:
  WriterNet(numerics::Tape& tape, WriterParams& params);
  WriterNet(numerics::Tape& tape, const WriterParams& params);

  numerics::Tape& tape() const noexcept { return tape_; }
  const WriterParams& params() const noexcept { return params_; }
  std::size_t hidden() const noexcept { return params_.decoder.hidden_dim; }

  Var embed(TokenId id);
  // Throws std::invalid_argument for an empty source.
  EncodedReference encode_reference(std::span<const TokenId> source);
  BoundMemory bind_memory(std::span<const EntityMemory> entities);

  // Initial decoder state: the last reference state refined by the init hops.
  // hop_weights, when given, receives the attention of each hop.
  Var init_query(const EncodedReference& reference, const BoundMemory& memory,
                 std::vector<Var>* hop_weights = nullptr);
  MemoryRead memory_step(Var hidden, const BoundMemory& memory, Var coverage);
  AttentionRead reference_attention(Var hidden, const EncodedReference& reference, Var coverage);
  Mixture mixture(Var hidden, const AttentionRead& attention, const MemoryRead& memory, Var previous,
                  const CopyLayout& layout, const GateOverride& pinned = {});
  Var decoder_cell(Var input, Var hidden);

 private:
  Var leaf(const Parameter& p);
  Var hop(const MemoryHop& weights, Var key, Var query, Var coverage);

  numerics::Tape& tape_;
  const WriterParams& params_;
  WriterParams* trainable_ = nullptr;
  numerics::GruBinding encoder_forward_, encoder_backward_, decoder_;
  bool bound_ = false;
  void bind_grus();
};

struct StepVars {
  Var hidden;
  AttentionRead attention;
  MemoryRead memory;
  Mixture mix;
};

// One decoding step: consume the previous output, attend, and mix.
StepVars decode_step(WriterNet& net, const EncodedReference& reference, const BoundMemory& memory,
                     const CopyLayout& layout, Var previous_hidden, TokenId previous_output,
                     Var reference_coverage, Var entity_coverage, const GateOverride& pinned = {});

struct WriterExample {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::vector<EntityMemory> entities;
};

struct PreparedExample {
  std::vector<std::string> source;  // truncated
  std::vector<TokenId> source_ids;  // vocabulary ids for the encoder
  std::vector<EntityMemory> entities;
  CopyLayout layout;
  std::vector<TokenId> targets;     // output ids, ending with EOS
};

// Truncates source and target to the configured length and maps the target to
// output ids; target words neither in the vocabulary nor copyable become UNK.
PreparedExample prepare_example(const WriterModel& model, const WriterExample& example);

struct SequenceLoss {
  Var total;     // negative log-likelihood plus weighted coverage penalty
  Var nll;
  Var coverage;  // unweighted coverage penalty
  std::size_t tokens = 0;
};

// Overlap between this step's attention and the attention accumulated before
// it: sum over positions of min(attention, coverage).
Var coverage_penalty(Var attention, Var coverage);

// Teacher-forced loss over the whole target.
SequenceLoss sequence_loss(WriterNet& net, const WriterConfig& config, const PreparedExample& example);

}  // namespace scidraft::writer
