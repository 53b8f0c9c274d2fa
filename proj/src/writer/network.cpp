#include "scidraft/writer/network.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "scidraft/error.hpp"
#include "scidraft/numerics/gru.hpp"
#include "scidraft/numerics/ops.hpp"

namespace scidraft::writer {

namespace nx = scidraft::numerics;

// ---------------------------------------------------------------------------
// CopyLayout

CopyLayout::CopyLayout(const Vocabulary& vocab, std::span<const std::string> source,
                       std::span<const EntityMemory> entities)
    : vocab_(&vocab), entity_count_(entities.size()) {
  for (const auto& word : source) source_targets_.push_back(intern(word));
  for (std::size_t m = 0; m < entities.size(); ++m) {
    const auto& tokens = entities[m].tokens;
    if (tokens.empty()) throw std::invalid_argument("related entity without name tokens");
    for (const auto& word : tokens) {
      entity_from_.push_back(m);
      entity_to_.push_back(intern(word));
      entity_weight_.push_back(1.0 / static_cast<double>(tokens.size()));
    }
  }
}

TokenId CopyLayout::intern(const std::string& word) {
  if (vocab_->contains(word)) return vocab_->id(word);
  auto [it, inserted] = extra_index_.try_emplace(word, static_cast<TokenId>(vocab_->size() + extra_.size()));
  if (inserted) extra_.push_back(word);
  return it->second;
}

TokenId CopyLayout::id(std::string_view word) const {
  if (vocab_->contains(word)) return vocab_->id(word);
  auto it = extra_index_.find(std::string(word));
  return it == extra_index_.end() ? kUnk : it->second;
}

const std::string& CopyLayout::word(TokenId id) const {
  if (id < vocab_->size()) return vocab_->token(id);
  if (id - vocab_->size() < extra_.size()) return extra_[id - vocab_->size()];
  throw std::out_of_range("output id " + std::to_string(id) + " outside the copy layout");
}

// ---------------------------------------------------------------------------
// WriterNet

WriterNet::WriterNet(nx::Tape& tape, WriterParams& params) : tape_(tape), params_(params), trainable_(&params) {}

WriterNet::WriterNet(nx::Tape& tape, const WriterParams& params) : tape_(tape), params_(params) {}

Var WriterNet::leaf(const Parameter& p) {
  // p is a member of *trainable_ whenever trainable_ is set.
  return trainable_ ? tape_.param(const_cast<Parameter&>(p)) : tape_.param(p);
}

void WriterNet::bind_grus() {
  if (bound_) return;
  if (trainable_) {
    encoder_forward_ = nx::bind(tape_, trainable_->encoder_forward);
    encoder_backward_ = nx::bind(tape_, trainable_->encoder_backward);
    decoder_ = nx::bind(tape_, trainable_->decoder);
  } else {
    encoder_forward_ = nx::bind(tape_, params_.encoder_forward);
    encoder_backward_ = nx::bind(tape_, params_.encoder_backward);
    decoder_ = nx::bind(tape_, params_.decoder);
  }
  bound_ = true;
}

Var WriterNet::embed(TokenId id) { return nx::row(leaf(params_.token_embeddings), id); }

EncodedReference WriterNet::encode_reference(std::span<const TokenId> source) {
  if (source.empty()) throw std::invalid_argument("cannot encode an empty reference");
  bind_grus();
  const std::size_t length = source.size();
  const std::size_t half = params_.encoder_forward.hidden_dim;
  std::vector<Var> inputs;
  inputs.reserve(length);
  for (TokenId id : source) inputs.push_back(embed(id));

  std::vector<Var> forward(length), backward(length);
  Var state = tape_.constant(Tensor({half}));
  for (std::size_t j = 0; j < length; ++j) forward[j] = state = nx::gru_cell(inputs[j], state, encoder_forward_);
  state = tape_.constant(Tensor({half}));
  for (std::size_t j = length; j-- > 0;) backward[j] = state = nx::gru_cell(inputs[j], state, encoder_backward_);

  std::vector<Var> rows;
  rows.reserve(length);
  for (std::size_t j = 0; j < length; ++j) rows.push_back(nx::concat({forward[j], backward[j]}));
  EncodedReference out;
  out.states = nx::stack_rows(rows);
  out.keys = nx::matmul_transposed(out.states, leaf(params_.attention_reference));
  out.last = rows.back();
  out.length = length;
  return out;
}

BoundMemory WriterNet::bind_memory(std::span<const EntityMemory> entities) {
  BoundMemory memory;
  memory.count = entities.size();
  if (entities.empty()) return memory;
  const Var table = leaf(params_.entity_embeddings);
  std::vector<Var> rows;
  for (const auto& e : entities) {
    if (e.row >= params_.entity_embeddings.value.rows()) {
      throw std::out_of_range("entity row " + std::to_string(e.row) + " outside the writer's entity table");
    }
    rows.push_back(nx::row(table, e.row));
  }
  memory.embeddings = nx::stack_rows(rows);
  for (const MemoryHop& h : params_.init_hops) {
    memory.init_keys.push_back(nx::matmul_transposed(memory.embeddings, leaf(h.memory)));
  }
  for (const MemoryHop& h : params_.memory_hops) {
    memory.step_keys.push_back(nx::matmul_transposed(memory.embeddings, leaf(h.memory)));
  }
  return memory;
}

Var WriterNet::hop(const MemoryHop& weights, Var key, Var query, Var coverage) {
  const Var shift = nx::add(nx::matvec(leaf(weights.query), query), leaf(weights.bias));
  Var keys = key;
  if (coverage.valid()) keys = nx::add(keys, nx::outer(coverage, leaf(params_.memory_coverage)));
  const Var logits = nx::matvec(nx::tanh(nx::add_row_broadcast(keys, shift)), leaf(weights.score));
  return nx::softmax(logits);
}

Var WriterNet::init_query(const EncodedReference& reference, const BoundMemory& memory,
                          std::vector<Var>* hop_weights) {
  Var query = reference.last;
  if (memory.count == 0) return query;
  for (std::size_t k = 0; k < params_.init_hops.size(); ++k) {
    const Var weights = hop(params_.init_hops[k], memory.init_keys[k], query, Var{});
    if (hop_weights) hop_weights->push_back(weights);
    query = nx::add(query, nx::vecmat(weights, memory.embeddings));
  }
  return query;
}

MemoryRead WriterNet::memory_step(Var hidden, const BoundMemory& memory, Var coverage) {
  MemoryRead out;
  if (memory.count == 0) {
    out.read = tape_.constant(Tensor({this->hidden()}));
    return out;
  }
  if (params_.memory_hops.empty()) throw std::invalid_argument("entity memory needs at least one hop");
  Var query = hidden;
  for (std::size_t k = 0; k < params_.memory_hops.size(); ++k) {
    out.weights = hop(params_.memory_hops[k], memory.step_keys[k], query, coverage);
    out.hop_weights.push_back(out.weights);
    out.read = nx::vecmat(out.weights, memory.embeddings);
    query = nx::add(query, out.read);
  }
  return out;
}

AttentionRead WriterNet::reference_attention(Var hidden, const EncodedReference& reference, Var coverage) {
  const Var shift = nx::add(nx::matvec(leaf(params_.attention_decoder), hidden), leaf(params_.attention_bias));
  const Var keys = nx::add(reference.keys, nx::outer(coverage, leaf(params_.attention_coverage)));
  const Var logits = nx::matvec(nx::tanh(nx::add_row_broadcast(keys, shift)), leaf(params_.attention_score));
  AttentionRead out;
  out.weights = nx::softmax(logits);
  out.context = nx::vecmat(out.weights, reference.states);
  return out;
}

Mixture WriterNet::mixture(Var hidden, const AttentionRead& attention, const MemoryRead& memory, Var previous,
                           const CopyLayout& layout, const GateOverride& pinned) {
  Mixture out;
  const std::size_t extended = layout.size();
  const std::size_t extra = extended - layout.base_size();

  const Var features = nx::concat({hidden, attention.context, memory.read});
  Var generate =
      nx::softmax(nx::add(nx::matvec(leaf(params_.generator_weight), features), leaf(params_.generator_bias)));
  if (extra > 0) generate = nx::concat({generate, tape_.constant(Tensor({extra}))});
  out.generate = generate;

  std::vector<std::size_t> positions(attention.weights.size());
  std::iota(positions.begin(), positions.end(), 0);
  const std::vector<double> ones(positions.size(), 1.0);
  out.reference = nx::scatter_add(attention.weights, positions, layout.source_targets(), ones, extended);

  if (pinned.generate) {
    out.gate = tape_.constant(Tensor::scalar(*pinned.generate));
  } else {
    out.gate = nx::sigmoid(nx::add(nx::add(nx::dot(leaf(params_.gate_decoder), hidden),
                                           nx::dot(leaf(params_.gate_previous), previous)),
                                   leaf(params_.gate_bias)));
  }

  Var copy = out.reference;
  if (layout.has_entities()) {
    out.entity = nx::scatter_add(memory.weights, layout.entity_sources(), layout.entity_targets(),
                                 layout.entity_weights(), extended);
    if (pinned.copy_reference) {
      out.copy_gate = tape_.constant(Tensor::scalar(*pinned.copy_reference));
    } else {
      out.copy_gate = nx::sigmoid(nx::add(nx::add(nx::dot(leaf(params_.copy_gate_context), attention.context),
                                                  nx::dot(leaf(params_.copy_gate_memory), memory.read)),
                                          leaf(params_.copy_gate_bias)));
    }
    copy = nx::add(nx::mul_scalar(out.reference, out.copy_gate),
                   nx::mul_scalar(out.entity, nx::one_minus(out.copy_gate)));
  } else {
    // Nothing to copy from the memory: every copy comes from the reference.
    out.copy_gate = tape_.constant(Tensor::scalar(1.0));
  }
  out.distribution = nx::add(nx::mul_scalar(generate, out.gate), nx::mul_scalar(copy, nx::one_minus(out.gate)));
  return out;
}

Var WriterNet::decoder_cell(Var input, Var hidden) {
  bind_grus();
  return nx::gru_cell(input, hidden, decoder_);
}

StepVars decode_step(WriterNet& net, const EncodedReference& reference, const BoundMemory& memory,
                     const CopyLayout& layout, Var previous_hidden, TokenId previous_output,
                     Var reference_coverage, Var entity_coverage, const GateOverride& pinned) {
  StepVars step;
  const Var input = net.embed(layout.input_id(previous_output));
  step.hidden = net.decoder_cell(input, previous_hidden);
  step.memory = net.memory_step(step.hidden, memory, entity_coverage);
  step.attention = net.reference_attention(step.hidden, reference, reference_coverage);
  step.mix = net.mixture(step.hidden, step.attention, step.memory, input, layout, pinned);
  return step;
}

// ---------------------------------------------------------------------------

Var coverage_penalty(Var attention, Var coverage) { return nx::sum(nx::minimum(attention, coverage)); }

PreparedExample prepare_example(const WriterModel& model, const WriterExample& example) {
  if (example.source.empty()) throw DataError("writer example has an empty source");
  const std::size_t limit = model.config.max_len;
  std::vector<std::string> source(example.source.begin(),
                                  example.source.begin() + std::min(limit, example.source.size()));
  std::vector<TokenId> source_ids;
  for (const auto& w : source) source_ids.push_back(model.vocab.id(w));
  CopyLayout layout(model.vocab, source, example.entities);
  std::vector<TokenId> targets;
  for (std::size_t i = 0; i < std::min(limit, example.target.size()); ++i) {
    targets.push_back(layout.id(example.target[i]));
  }
  targets.push_back(kEos);
  return PreparedExample{std::move(source), std::move(source_ids), example.entities, std::move(layout),
                         std::move(targets)};
}

SequenceLoss sequence_loss(WriterNet& net, const WriterConfig& config, const PreparedExample& example) {
  nx::Tape& tape = net.tape();
  const EncodedReference reference = net.encode_reference(example.source_ids);
  const BoundMemory memory = net.bind_memory(example.entities);
  Var hidden = net.init_query(reference, memory);
  Var reference_coverage = tape.constant(Tensor({reference.length}));
  Var entity_coverage = memory.count ? tape.constant(Tensor({memory.count})) : Var{};

  std::vector<Var> nll_terms, coverage_terms;
  TokenId previous = kBos;
  for (TokenId gold : example.targets) {
    const StepVars step = decode_step(net, reference, memory, example.layout, hidden, previous,
                                      reference_coverage, entity_coverage);
    nll_terms.push_back(nx::log(nx::pick(step.mix.distribution, gold)));
    coverage_terms.push_back(coverage_penalty(step.attention.weights, reference_coverage));
    reference_coverage = nx::add(reference_coverage, step.attention.weights);
    if (memory.count) {
      coverage_terms.push_back(coverage_penalty(step.memory.weights, entity_coverage));
      entity_coverage = nx::add(entity_coverage, step.memory.weights);
    }
    hidden = step.hidden;
    previous = gold;
  }
  SequenceLoss loss;
  loss.tokens = example.targets.size();
  loss.nll = nx::scale(nx::sum(nx::concat(nll_terms)), -1.0);
  loss.coverage = nx::sum(nx::concat(coverage_terms));
  loss.total = nx::add(loss.nll, nx::scale(loss.coverage, config.coverage_lambda));
  return loss;
}

}  // namespace scidraft::writer
