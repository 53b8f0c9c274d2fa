#include "scidraft/writer/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scidraft/numerics/ops.hpp"

namespace scidraft::writer {

namespace nx = scidraft::numerics;

std::string_view to_string(TokenSource source) {
  switch (source) {
    case TokenSource::Generate:
      return "generate";
    case TokenSource::CopyTitle:
      return "copy-title";
    case TokenSource::CopyEntity:
      return "copy-entity";
  }
  return "generate";
}

TokenSource StepDistribution::source_of(TokenId id) const {
  const double g = generated[id];
  const double t = copied_reference[id];
  const double e = copied_entity.empty() ? 0.0 : copied_entity[id];
  if (g >= t && g >= e) return TokenSource::Generate;
  return t >= e ? TokenSource::CopyTitle : TokenSource::CopyEntity;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> truncated(std::span<const std::string> source, std::size_t limit) {
  if (source.empty()) throw std::invalid_argument("cannot decode from an empty source");
  return {source.begin(), source.begin() + std::min(limit, source.size())};
}

}  // namespace

DecoderSession::DecoderSession(const WriterModel& model, std::span<const std::string> source,
                               std::vector<EntityMemory> entities, GateOverride pinned)
    : model_(model),
      source_(truncated(source, model.config.max_len)),
      entities_(std::move(entities)),
      layout_(model.vocab, source_, entities_),
      pinned_(pinned) {
  nx::Tape tape;
  WriterNet net(tape, model_.params);
  std::vector<TokenId> ids;
  for (const auto& w : source_) ids.push_back(model_.vocab.id(w));
  const EncodedReference reference = net.encode_reference(ids);
  const BoundMemory memory = net.bind_memory(entities_);
  states_ = reference.states.value();
  keys_ = reference.keys.value();
  initial_hidden_ = net.init_query(reference, memory).value();
  if (memory.count) {
    memory_ = memory.embeddings.value();
    for (const Var& k : memory.step_keys) memory_keys_.push_back(k.value());
  }
}

DecoderState DecoderSession::initial_state() const {
  DecoderState state;
  state.hidden = initial_hidden_;
  state.reference_coverage = Tensor({source_.size()});
  if (!entities_.empty()) state.entity_coverage = Tensor({entities_.size()});
  return state;
}

StepDistribution DecoderSession::step(const DecoderState& state) const {
  nx::Tape tape;
  WriterNet net(tape, model_.params);
  EncodedReference reference;
  reference.states = tape.constant(states_);
  reference.keys = tape.constant(keys_);
  reference.length = source_.size();
  BoundMemory memory;
  memory.count = entities_.size();
  Var entity_coverage;
  if (memory.count) {
    memory.embeddings = tape.constant(memory_);
    for (const Tensor& k : memory_keys_) memory.step_keys.push_back(tape.constant(k));
    entity_coverage = tape.constant(state.entity_coverage);
  }
  const StepVars vars = decode_step(net, reference, memory, layout_, tape.constant(state.hidden), state.previous,
                                    tape.constant(state.reference_coverage), entity_coverage, pinned_);

  StepDistribution out;
  out.probabilities = vars.mix.distribution.value();
  out.gate = vars.mix.gate.item();
  out.copy_gate = vars.mix.copy_gate.item();
  out.generated = vars.mix.generate.value();
  for (double& v : out.generated.data()) v *= out.gate;
  out.copied_reference = vars.mix.reference.value();
  for (double& v : out.copied_reference.data()) v *= (1.0 - out.gate) * out.copy_gate;
  if (vars.mix.entity.valid()) {
    out.copied_entity = vars.mix.entity.value();
    for (double& v : out.copied_entity.data()) v *= (1.0 - out.gate) * (1.0 - out.copy_gate);
    out.entity_weights = vars.memory.weights.value();
  }
  out.attention = vars.attention.weights.value();
  out.hidden = vars.hidden.value();
  return out;
}

DecoderState DecoderSession::advance(const DecoderState& state, const StepDistribution& step, TokenId chosen) const {
  DecoderState next = state;
  ++next.step;
  next.hidden = step.hidden;
  for (std::size_t j = 0; j < next.reference_coverage.size(); ++j) next.reference_coverage[j] += step.attention[j];
  for (std::size_t j = 0; j < next.entity_coverage.size(); ++j) next.entity_coverage[j] += step.entity_weights[j];
  next.previous = chosen;
  next.output.push_back(chosen);
  return next;
}

// ---------------------------------------------------------------------------

namespace {

struct Hypothesis {
  DecoderState state;
  std::vector<TokenId> ids;
  std::vector<TokenSource> sources;
  double log_probability = 0.0;
  double score = 0.0;
};

struct Candidate {
  std::size_t parent = 0;
  TokenId token = 0;
  double log_probability = 0.0;
  double score = 0.0;
  std::vector<TokenId> ids;
};

double normalised(double log_probability, std::size_t length) {
  return log_probability / static_cast<double>(std::max<std::size_t>(length, 1));
}

template <class T>
bool ranks_before(const T& a, const T& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ids < b.ids;
}

// Tokens a hypothesis may emit next, with their probabilities.
std::vector<std::pair<TokenId, double>> allowed_tokens(const StepDistribution& dist, const Hypothesis& hyp,
                                                       const CopyLayout& layout, const TokenSets& sets,
                                                       bool mask_repeats) {
  std::vector<std::pair<TokenId, double>> out;
  const auto& p = dist.probabilities;
  for (TokenId w = 0; w < p.size(); ++w) {
    if (!(p[w] > 0.0) || w == kPad || w == kBos) continue;
    if (w == kEos && hyp.ids.empty()) continue;
    if (mask_repeats && w != kEos && sets.maskable(layout.word(w)) &&
        std::find(hyp.ids.begin(), hyp.ids.end(), w) != hyp.ids.end()) {
      continue;
    }
    out.emplace_back(w, p[w]);
  }
  if (!out.empty()) return out;

  TokenId best = kEos;
  double best_p = 0.0;
  for (TokenId w = kSpecialCount; w < p.size(); ++w) {
    if (p[w] > best_p && sets.is_stopword(layout.word(w))) {
      best = w;
      best_p = p[w];
    }
  }
  return {{best, best == kEos ? p[kEos] : best_p}};
}

}  // namespace

Generation beam_search(const WriterModel& model, std::span<const std::string> source,
                       std::vector<EntityMemory> entities, const TokenSets& token_sets, const BeamOptions& options) {
  if (options.beam == 0) throw std::invalid_argument("beam width must be at least 1");
  const DecoderSession session(model, source, std::move(entities), options.pinned);
  const CopyLayout& layout = session.layout();

  std::vector<Hypothesis> alive{Hypothesis{session.initial_state(), {}, {}, 0.0, 0.0}};
  std::vector<Hypothesis> finished;

  for (std::size_t t = 0; t < options.max_len && !alive.empty() && finished.size() < options.beam; ++t) {
    std::vector<StepDistribution> dists;
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < alive.size(); ++h) {
      dists.push_back(session.step(alive[h].state));
      for (const auto& [w, p] : allowed_tokens(dists.back(), alive[h], layout, token_sets, options.mask_repeats)) {
        Candidate c{h, w, alive[h].log_probability + std::log(p), 0.0, alive[h].ids};
        c.ids.push_back(w);
        c.score = normalised(c.log_probability, c.ids.size());
        candidates.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min(options.beam - finished.size(), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      ranks_before<Candidate>);

    std::vector<Hypothesis> next;
    for (std::size_t k = 0; k < keep; ++k) {
      Candidate& c = candidates[k];
      const Hypothesis& parent = alive[c.parent];
      Hypothesis hyp;
      hyp.log_probability = c.log_probability;
      hyp.score = c.score;
      hyp.sources = parent.sources;
      hyp.sources.push_back(dists[c.parent].source_of(c.token));
      hyp.ids = std::move(c.ids);
      if (c.token == kEos) {
        finished.push_back(std::move(hyp));
      } else {
        hyp.state = session.advance(parent.state, dists[c.parent], c.token);
        next.push_back(std::move(hyp));
      }
    }
    alive = std::move(next);
  }
  // Hypotheses cut off by the length limit compete as they are.
  for (auto& h : alive) finished.push_back(std::move(h));

  const auto best = std::min_element(finished.begin(), finished.end(), ranks_before<Hypothesis>);
  Generation out;
  out.log_probability = best->log_probability;
  out.score = best->score;
  for (std::size_t i = 0; i < best->ids.size(); ++i) {
    if (best->ids[i] == kEos) break;
    out.ids.push_back(best->ids[i]);
    out.tokens.push_back(layout.word(best->ids[i]));
    out.sources.push_back(best->sources[i]);
  }
  return out;
}

}  // namespace scidraft::writer
