// Acceptance run: one line per criterion, non-zero exit if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scidraft/cli/commands.hpp"
#include "scidraft/cli/config.hpp"
#include "scidraft/cli/papers.hpp"
#include "scidraft/eval/metrics.hpp"
#include "scidraft/eval/writer_provider.hpp"
#include "scidraft/kg/io.hpp"
#include "scidraft/link/enrich.hpp"
#include "scidraft/link/train.hpp"
#include "scidraft/numerics/ops.hpp"
#include "scidraft/writer/chain.hpp"
#include "scidraft/writer/corpus.hpp"
#include "scidraft/writer/train.hpp"
#include "support/finite_difference.hpp"
#include "support/oracles.hpp"
#include "support/synthetic_kg.hpp"

using namespace scidraft;
using numerics::Rng;
using numerics::Tensor;
using numerics::Var;
using writer::EntityMemory;
using writer::TokenId;
namespace fs = std::filesystem;
namespace nx = scidraft::numerics;

namespace {

const fs::path kToy = SCIDRAFT_TOY_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> words(const std::string& text) { return writer::split_words(text); }

double sum_of(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s;
}

double min_of(const Tensor& t) { return *std::min_element(t.values().begin(), t.values().end()); }

const std::vector<std::string> kPool{"zinc", "binds", "the", "novel", "of", "cd14", ",", "cells",
                                     "kinase", "tumor", ".", "xyz", "mutant", "and", "signalling"};

writer::Vocabulary pool_vocab() {
  return writer::Vocabulary({"<pad>", "<s>", "</s>", "<unk>", "zinc", "binds", "the", "of", "cells", "tumor", ",", "."});
}

writer::WriterConfig small_config(std::size_t embedding, std::size_t hidden, std::size_t hops) {
  writer::WriterConfig c;
  c.embedding = embedding;
  c.hidden = hidden;
  c.init_hops = hops;
  c.memory_hops = hops;
  c.max_len = 20;
  return c;
}

std::vector<std::string> random_source(Rng& g, std::size_t max_len) {
  std::vector<std::string> out;
  for (std::size_t i = 0, n = 1 + g.index(max_len); i < n; ++i) out.push_back(kPool[g.index(kPool.size())]);
  return out;
}

std::vector<EntityMemory> random_entities(Rng& g, std::size_t rows, std::size_t max_count) {
  std::vector<EntityMemory> out;
  for (std::size_t i = 0, n = g.index(max_count + 1); i < n; ++i) {
    EntityMemory e{g.index(rows), {}};
    for (std::size_t k = 0, m = 1 + g.index(3); k < m; ++k) e.tokens.push_back(kPool[g.index(kPool.size())]);
    out.push_back(e);
  }
  return out;
}

// Content tokens (neither stop words nor punctuation) that occur more than once.
std::size_t content_repeats(const std::vector<std::string>& tokens, const writer::TokenSets& sets) {
  std::map<std::string, std::size_t> count;
  for (const auto& t : tokens) {
    if (!sets.is_stopword(t) && !writer::TokenSets::is_punctuation(t)) ++count[t];
  }
  std::size_t repeats = 0;
  for (const auto& [t, n] : count) repeats += n > 1;
  return repeats;
}

struct ToyData {
  kg::KnowledgeGraph graph;
  std::vector<writer::WriterExample> title2abstract;
};

ToyData load_toy() {
  ToyData d;
  std::ifstream triples(kToy / "triples.tsv");
  d.graph = kg::read_triples(triples);
  std::ifstream papers(kToy / "papers.jsonl");
  const cli::TaskCorpora corpora = cli::build_task_corpora(cli::read_papers(papers));
  d.title2abstract = writer::to_examples(corpora.title2abstract, d.graph);
  for (auto& ex : d.title2abstract) {
    for (const auto& r : writer::title_related(ex.source, d.graph, 10)) {
      ex.entities.push_back(EntityMemory{r.entity, kg::name_tokens(d.graph.entity(r.entity))});
    }
  }
  return d;
}

writer::WriterModel train_toy_writer(const ToyData& d, const cli::Config& c, writer::WriterTrainReport* report,
                                     std::size_t epochs) {
  Rng rng(c.seed);
  writer::WriterModel m = writer::create_writer_model(
      cli::writer_config(c), "title2abstract", writer::build_writer_vocab(d.title2abstract, c.oov_floor),
      d.graph.entity_count(), rng, c.init_scale);
  writer::WriterTrainOptions options;
  options.epochs = epochs;
  options.seed = c.seed;
  options.adam.learning_rate = c.learning_rate;
  options.target_perplexity = c.target_perplexity;
  const auto r = writer::train_writer(m, d.title2abstract, options);
  if (report) *report = r;
  return m;
}

// ---------------------------------------------------------------------------

Verdict gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  kg::KnowledgeGraph graph;
  const auto zinc = graph.add_entity("D1", "zinc", kg::EntityType::Chemical);
  const auto cd14 = graph.add_entity("G1", "cd14", kg::EntityType::Gene);
  const auto tnf = graph.add_entity("G2", "tnf", kg::EntityType::Gene);
  const auto nos3 = graph.add_entity("G3", "nos3", kg::EntityType::Gene);
  const auto nrp2 = graph.add_entity("G4", "neuropilin 2", kg::EntityType::Gene);
  const auto calcium = graph.add_entity("D2", "calcium", kg::EntityType::Chemical);
  const auto binds = graph.add_relation("binds");
  graph.add_triple(zinc, binds, tnf);
  graph.add_triple(zinc, binds, nos3);
  graph.add_triple(cd14, binds, nrp2);
  graph.add_triple(calcium, binds, tnf);
  kg::ContextIndex context;
  context.add_sentence(1, words("zinc raises tnf in macrophages"), std::vector<kg::EntityId>{zinc, tnf});
  context.add_sentence(2, words("cd14 and neuropilin 2 bind"), std::vector<kg::EntityId>{cd14, nrp2});
  context.add_sentence(3, words("calcium channels"), std::vector<kg::EntityId>{calcium});

  const auto title = words("zinc regulates cd14 in macrophages");
  const auto target = words("zinc binds tnf and nos3 .");
  const auto related = writer::title_related(title, graph, 10);
  if (related.size() != 3) return {false, "fixture has " + std::to_string(related.size()) + " related entities"};

  link::LinkConfig lc;
  lc.entity_dim = 4;
  lc.heads = 2;
  lc.head_hidden = 2;
  lc.text_emb = 3;
  lc.text_hidden = 2;
  lc.text_dim = 3;
  Rng rng(5);
  link::LinkPredictParams link_params = link::create_link_params(lc, graph, context, rng, 0.5);
  writer::WriterModel model = writer::create_writer_model(
      small_config(4, 6, 3), "title2abstract", writer::build_writer_vocab(std::vector<writer::WriterExample>{{title, target, {}}}, 1),
      graph.entity_count(), rng, 0.4);
  const writer::PreparedExample prepared =
      writer::prepare_example(model, {title, target, writer::entity_memories(related, graph, model)});
  // Fixed corruptions keep the margin terms deterministic.
  const std::vector<std::pair<kg::Triple, kg::Triple>> margin_pairs{
      {{zinc, binds, tnf, 1.0}, {zinc, binds, nrp2, 1.0}},
      {{zinc, binds, nos3, 1.0}, {calcium, binds, nos3, 1.0}},
      {{cd14, binds, nrp2, 1.0}, {cd14, binds, tnf, 1.0}},
  };

  // Below this magnitude the comparison is effectively absolute: rounding in a
  // loss of about 30 limits the finite differences to roughly 1e-11.
  constexpr double kFloor = 1e-6;
  std::vector<numerics::Parameter*> params = model.params.parameters();
  const auto lp = link_params.parameters();
  params.insert(params.end(), lp.begin(), lp.end());
  const auto check = testing::check_gradients(
      [&](numerics::Tape& tape) {
        writer::WriterNet net(tape, model.params);
        Var loss = writer::sequence_loss(net, model.config, prepared).total;
        link::EntityEncoder enc(tape, link_params, graph, context);
        for (const auto& [gold, bad] : margin_pairs) {
          const Var g = enc.score(enc.combined(gold.head), gold.relation, enc.combined(gold.tail));
          const Var b = enc.score(enc.combined(bad.head), bad.relation, enc.combined(bad.tail));
          loss = nx::add(loss, nx::relu(nx::add_scalar(nx::sub(b, g), lc.margin)));
        }
        return loss;
      },
      params, 1e-3, kFloor, true);
  const double elapsed = seconds_since(start);
  const bool pass = check.max_relative_error < 1e-4 && elapsed < 60.0;
  return {pass, "max relative error " + fmt("%.2e", check.max_relative_error) + " (" + check.worst_parameter + "[" +
                    std::to_string(check.worst_index) + "]: " + fmt("%.3e", check.analytic) + " vs " +
                    fmt("%.3e", check.numeric) + ") over " + std::to_string(check.entries_checked) + " entries, " +
                    fmt("%.1f s", elapsed)};
}

Verdict distribution_soundness() {
  Rng g(2024);
  const writer::Vocabulary vocab = pool_vocab();
  std::size_t evaluations = 0, failures = 0;
  double worst = 0.0;
  auto check_sum = [&](const Tensor& t) {
    const double dev = std::abs(sum_of(t) - 1.0);
    worst = std::max(worst, dev);
    if (dev > 1e-9 || min_of(t) < 0.0) ++failures;
  };
  while (evaluations < 10000) {
    const writer::WriterConfig config = small_config(2 + g.index(5), 2 * (1 + g.index(4)), 1 + g.index(3));
    Rng init(g.index(1u << 30));
    const writer::WriterModel m = writer::create_writer_model(config, "t", vocab, 6, init, g.uniform(0.1, 3.0));
    const auto source = random_source(g, 8);
    const auto entities = random_entities(g, 6, 4);
    writer::GateOverride pinned;
    if (g.index(4) == 0) pinned = {g.uniform(), g.uniform()};

    numerics::Tape tape;
    writer::WriterNet net(tape, m.params);
    std::vector<TokenId> ids;
    for (const auto& w : source) ids.push_back(m.vocab.id(w));
    const writer::CopyLayout layout(m.vocab, source, entities);
    const auto reference = net.encode_reference(ids);
    const auto memory = net.bind_memory(entities);
    std::vector<Var> init_weights;
    Var hidden = net.init_query(reference, memory, &init_weights);
    for (const Var& w : init_weights) check_sum(w.value());
    Var reference_coverage = tape.constant(Tensor({reference.length}));
    Var entity_coverage = memory.count ? tape.constant(Tensor({memory.count})) : Var{};
    TokenId previous = writer::kBos;
    for (int t = 0; t < 5 && evaluations < 10000; ++t, ++evaluations) {
      const auto step = writer::decode_step(net, reference, memory, layout, hidden, previous, reference_coverage,
                                            entity_coverage, pinned);
      check_sum(step.mix.distribution.value());
      check_sum(step.attention.weights.value());
      for (const Var& w : step.memory.hop_weights) check_sum(w.value());
      if (memory.count && step.memory.hop_weights.size() != config.memory_hops) ++failures;
      reference_coverage = nx::add(reference_coverage, step.attention.weights);
      if (memory.count) entity_coverage = nx::add(entity_coverage, step.memory.weights);
      hidden = step.hidden;
      previous = static_cast<TokenId>(g.index(layout.size()));
    }
  }
  return {failures == 0, std::to_string(evaluations) + " mixtures, " + std::to_string(failures) +
                             " violations, largest deviation " + fmt("%.1e", worst)};
}

Verdict coverage_semantics() {
  Rng g(77);
  std::size_t failures = 0, sessions = 0, sequences = 0;
  auto penalty = [](const Tensor& attention, const Tensor& coverage) {
    numerics::Tape tape;
    return writer::coverage_penalty(tape.constant(attention), tape.constant(coverage)).item();
  };

  // Coverage carried by real decoding sessions.
  const writer::Vocabulary vocab = pool_vocab();
  for (; sessions < 300; ++sessions) {
    Rng init(g.index(1u << 30));
    const writer::WriterModel m = writer::create_writer_model(small_config(4, 6, 2), "t", vocab, 5, init, 1.5);
    const auto source = random_source(g, 7);
    const auto entities = random_entities(g, 5, 3);
    const writer::DecoderSession session(m, source, entities);
    writer::DecoderState state = session.initial_state();
    if (sum_of(state.reference_coverage) != 0.0 || min_of(state.reference_coverage) != 0.0) ++failures;
    if (!entities.empty() && (sum_of(state.entity_coverage) != 0.0 || min_of(state.entity_coverage) != 0.0)) ++failures;
    for (std::size_t t = 0; t < 8; ++t) {
      const auto d = session.step(state);
      const double term = penalty(d.attention, state.reference_coverage);
      if (t == 0 ? term != 0.0 : !(term > 0.0)) ++failures;
      const auto next = session.advance(state, d, static_cast<TokenId>(g.index(session.layout().size())));
      for (std::size_t j = 0; j < next.reference_coverage.size(); ++j)
        if (next.reference_coverage[j] < state.reference_coverage[j]) ++failures;
      if (std::abs(sum_of(next.reference_coverage) - static_cast<double>(t + 1)) > 1e-9) ++failures;
      if (!entities.empty()) {
        for (std::size_t j = 0; j < next.entity_coverage.size(); ++j)
          if (next.entity_coverage[j] < state.entity_coverage[j]) ++failures;
        if (std::abs(sum_of(next.entity_coverage) - static_cast<double>(t + 1)) > 1e-9) ++failures;
      }
      state = next;
    }
  }

  // The penalty on arbitrary attention sequences, some of them sparse.
  for (; sequences < 5000; ++sequences) {
    const std::size_t positions = 1 + g.index(8), steps = 1 + g.index(8);
    Tensor coverage({positions});
    for (std::size_t t = 0; t < steps; ++t) {
      Tensor a({positions});
      double total = 0.0;
      for (std::size_t j = 0; j < positions; ++j) {
        if (g.index(3) != 0) total += a[j] = g.uniform(0.01, 1.0);
      }
      if (total == 0.0) total = a[g.index(positions)] = 1.0;
      bool revisited = false;
      double expected = 0.0;
      for (std::size_t j = 0; j < positions; ++j) {
        a[j] /= total;
        revisited = revisited || (a[j] > 0.0 && coverage[j] > 0.0);
        expected += std::min(a[j], coverage[j]);
      }
      const double term = penalty(a, coverage);
      if (t == 0 && term != 0.0) ++failures;
      if ((term > 0.0) != revisited || std::abs(term - expected) > 1e-12) ++failures;
      for (std::size_t j = 0; j < positions; ++j) coverage[j] += a[j];
    }
  }
  return {failures == 0, std::to_string(sessions) + " decoding sessions and " + std::to_string(sequences) +
                             " attention sequences, " + std::to_string(failures) + " violations"};
}

Verdict memorization() {
  const auto start = std::chrono::steady_clock::now();
  const ToyData d = load_toy();
  cli::Config c;  // default dimensions and optimiser
  c.oov_floor = 1;
  c.target_perplexity = 1.3;
  std::size_t longest_title = 0, longest_abstract = 0;
  for (const auto& ex : d.title2abstract) {
    longest_title = std::max(longest_title, ex.source.size());
    longest_abstract = std::max(longest_abstract, ex.target.size());
  }
  writer::WriterTrainReport report;
  const writer::WriterModel m = train_toy_writer(d, c, &report, 500);
  const double elapsed = seconds_since(start);
  const double evaluated = eval::perplexity(eval::WriterProvider(m, d.title2abstract));
  const bool corpus_ok = d.title2abstract.size() == 20 && longest_title <= 10 && longest_abstract <= 15 &&
                         m.vocab.size() - writer::kSpecialCount <= 200;
  const bool pass = corpus_ok && report.final_perplexity < 1.3 && report.epochs.size() <= 500 && elapsed < 300.0 &&
                    std::abs(evaluated - report.final_perplexity) <= 1e-6;
  return {pass, "perplexity " + fmt("%.4f", report.final_perplexity) + " after " +
                    std::to_string(report.epochs.size()) + " epochs, eval " + fmt("%.10f", evaluated) + ", " +
                    std::to_string(d.title2abstract.size()) + " pairs, vocab " +
                    std::to_string(m.vocab.size() - writer::kSpecialCount) + ", " + fmt("%.1f s", elapsed)};
}

Verdict repetition_guarantee() {
  const ToyData d = load_toy();
  const writer::TokenSets sets;
  const cli::Config toy = cli::load_config(kToy / "toy.conf");
  const writer::WriterModel trained = train_toy_writer(d, toy, nullptr, toy.writer_epochs);
  writer::BeamOptions options;
  options.max_len = 40;

  Rng g(5);
  std::size_t sequences = 0, offending = 0;
  auto generate = [&](const writer::WriterModel& m, const std::vector<std::string>& source,
                      const std::vector<EntityMemory>& entities) {
    const auto out = writer::beam_search(m, source, entities, sets, options);
    ++sequences;
    offending += content_repeats(out.tokens, sets) > 0;
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng init(seed);
    const writer::WriterModel random = writer::create_writer_model(cli::writer_config(toy), "title2abstract",
                                                                   trained.vocab, trained.entity_count, init, 0.5);
    for (std::size_t i = 0; i < 10; ++i) {
      const auto& ex = d.title2abstract[(seed * 10 + i) % d.title2abstract.size()];
      generate(random, ex.source, ex.entities);
    }
  }
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& ex = d.title2abstract[i % d.title2abstract.size()];
    std::vector<std::string> source = ex.source;
    if (i >= d.title2abstract.size()) {  // perturbed titles beyond the training set
      g.shuffle(source);
      source.push_back(trained.vocab.token(static_cast<TokenId>(writer::kSpecialCount + g.index(trained.vocab.size() - writer::kSpecialCount))));
    }
    generate(trained, source, ex.entities);
  }

  // A planted model that keeps favouring the same content words.
  writer::Vocabulary vocab({"<pad>", "<s>", "</s>", "<unk>", "the", "of", "zinc", "binds", "protein", "cells"});
  std::size_t planted = 0, planted_repeating = 0, planted_masked = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed, ++planted) {
    Rng init(100 + seed);
    writer::WriterModel m = writer::create_writer_model(small_config(4, 6, 2), "planted", vocab, 0, init, 0.3);
    m.params.gate_bias.value[0] = 4.0;
    m.params.generator_bias.value[vocab.id("zinc")] = 4.0;
    m.params.generator_bias.value[vocab.id("binds")] = 3.0;
    m.params.generator_bias.value[writer::kEos] = 1.0;
    const std::vector<std::string> source{"protein", kPool[g.index(kPool.size())], "cells"};
    writer::BeamOptions loose;
    loose.max_len = 12;
    loose.mask_repeats = false;
    planted_repeating += content_repeats(writer::beam_search(m, source, {}, sets, loose).tokens, sets) > 0;
    loose.mask_repeats = true;
    planted_masked += content_repeats(writer::beam_search(m, source, {}, sets, loose).tokens, sets) > 0;
  }
  const bool pass = sequences == 200 && offending == 0 && planted_masked == 0 && 2 * planted_repeating > planted;
  return {pass, std::to_string(offending) + " of " + std::to_string(sequences) +
                    " masked outputs repeat; unmasked planted model repeats in " + std::to_string(planted_repeating) +
                    " of " + std::to_string(planted) + " (masked: " + std::to_string(planted_masked) + ")"};
}

Verdict copy_containment() {
  Rng g(31);
  const writer::TokenSets sets;
  const writer::Vocabulary vocab = pool_vocab();
  std::size_t outputs = 0, tokens = 0, outside = 0;
  for (; outputs < 100; ++outputs) {
    Rng init(g.index(1u << 30));
    const writer::WriterModel m = writer::create_writer_model(small_config(4, 6, 2), "t", vocab, 5, init, 1.5);
    const auto source = random_source(g, 8);
    writer::BeamOptions options;
    options.max_len = 10;
    options.pinned.generate = 0.0;
    options.pinned.copy_reference = 1.0;
    const auto out = writer::beam_search(m, source, random_entities(g, 5, 3), sets, options);
    for (std::size_t i = 0; i < out.tokens.size(); ++i, ++tokens) {
      const bool in_source = std::find(source.begin(), source.end(), out.tokens[i]) != source.end();
      if (!in_source || out.sources[i] != writer::TokenSource::CopyTitle) ++outside;
    }
  }
  return {outside == 0 && tokens > 0, std::to_string(outside) + " of " + std::to_string(tokens) +
                                          " emitted tokens outside the source over " + std::to_string(outputs) +
                                          " outputs"};
}

Verdict link_sanity() {
  const auto start = std::chrono::steady_clock::now();
  const testing::SyntheticKg s = testing::make_synthetic_kg();
  const cli::Config c;
  Rng rng(c.seed);
  link::LinkPredictParams params = link::create_link_params(cli::link_config(c), s.graph, s.context, rng, c.init_scale);
  link::LinkTrainOptions options;
  options.epochs = 200;
  options.batch_size = c.link_batch;
  options.seed = c.seed;
  options.adam.learning_rate = c.learning_rate;
  link::train_margin(params, s.graph, s.context, options);
  const auto reps = link::encode_all(params, s.graph, s.context);

  // (a) Rank of each held-out triple among 20 sampled same-type corruptions,
  // filtered so that no true triple (the gold one included) counts as a
  // corruption; ties count against the gold triple.
  const link::CorruptionSampler sampler(s.graph);
  auto is_true = [&](const kg::Triple& t) {
    return std::any_of(s.truth.begin(), s.truth.end(), [&](const kg::Triple& x) {
      return x.head == t.head && x.relation == t.relation && x.tail == t.tail;
    });
  };
  Rng draw(99);
  double mrr = 0.0;
  for (const kg::Triple& gold : s.held_out) {
    const double gold_score = link::score_triple(params, reps[gold.head].combined, gold.relation, reps[gold.tail].combined);
    std::size_t rank = 1;
    for (int k = 0; k < 20; ++k) {
      kg::Triple bad;
      do {
        if (!sampler.corrupt(gold, draw, bad)) return {false, "no corruption available"};
      } while (is_true(bad));
      if (link::score_triple(params, reps[bad.head].combined, bad.relation, reps[bad.tail].combined) >= gold_score) ++rank;
    }
    mrr += 1.0 / static_cast<double>(rank) / static_cast<double>(s.held_out.size());
  }
  // Scores independent of the triple put the gold at a uniform rank in 1..21.
  double baseline = 0.0;
  for (int r = 1; r <= 21; ++r) baseline += 1.0 / r / 21.0;

  // (b) Each twin should pick up the edges only its partner has.
  const kg::KnowledgeGraph enriched = link::propagate_links(s.graph, reps, 0.9);
  std::size_t transferable = 0, recovered = 0;
  for (const auto& [a, b] : s.twins) {
    for (const auto& [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      for (const auto& e : s.graph.neighbors(from)) {
        if (s.graph.contains(to, e.relation, e.tail) || e.tail == to) continue;
        ++transferable;
        recovered += enriched.contains(to, e.relation, e.tail);
      }
    }
  }
  const double elapsed = seconds_since(start);
  const double share = transferable ? static_cast<double>(recovered) / static_cast<double>(transferable) : 0.0;
  const bool pass = mrr >= 3.0 * baseline && transferable > 0 && share >= 0.8 && elapsed < 120.0;
  return {pass, "MRR " + fmt("%.3f", mrr) + " vs random " + fmt("%.3f", baseline) + ", twins recovered " +
                    std::to_string(recovered) + "/" + std::to_string(transferable) + ", " + fmt("%.1f s", elapsed)};
}

Verdict oracle_equivalence() {
  Rng g(11);
  std::size_t overlap_mismatch = 0, propagate_mismatch = 0, greedy_mismatch = 0;
  auto random_tokens = [&](std::size_t max_len) {
    std::vector<std::string> out;
    for (std::size_t i = 0, n = g.index(max_len + 1); i < n; ++i) out.push_back(std::string(1, char('a' + g.index(4))));
    return out;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_tokens(12), out = random_tokens(12);
    const std::size_t n = 1 + g.index(4);
    if (eval::ngram_overlap(in, out, n).percentage != testing::brute_overlap(in, out, n)) ++overlap_mismatch;
  }

  for (int trial = 0; trial < 25; ++trial) {
    kg::KnowledgeGraph r;
    for (int i = 0; i < 20; ++i) r.add_entity("E" + std::to_string(i), "e", kg::EntityType::Gene);
    r.add_relation("a");
    r.add_relation("b");
    for (int k = 0; k < 35; ++k) {
      r.add_triple(static_cast<kg::EntityId>(g.index(20)), static_cast<kg::RelationId>(g.index(2)),
                   static_cast<kg::EntityId>(g.index(20)));
    }
    std::vector<link::EntityRepresentation> v(20);
    for (std::size_t e = 0; e < 20; ++e) {
      v[e].combined = Tensor({6});
      for (std::size_t i = 0; i < 6; ++i) v[e].combined[i] = (i == e % 4 ? 1.0 : 0.0) + g.uniform(-0.3, 0.3);
    }
    const auto expected = testing::brute_propagation(r, v, 0.9);
    const kg::KnowledgeGraph enriched = link::propagate_links(r, v, 0.9);
    bool same = enriched.triple_count() == r.triple_count() + expected.size();
    for (std::size_t k = 0; same && k < r.triple_count(); ++k) same = enriched.triples()[k] == r.triples()[k];
    std::size_t k = r.triple_count();
    for (const auto& [key, confidence] : expected) {
      if (!same) break;
      const kg::Triple& t = enriched.triples()[k++];
      same = std::tie(t.head, t.relation, t.tail) == key && t.confidence == confidence;
    }
    propagate_mismatch += !same;
  }

  const writer::TokenSets sets;
  const writer::Vocabulary vocab = pool_vocab();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng init(seed);
    const writer::WriterModel m = writer::create_writer_model(small_config(4, 6, 2), "t", vocab, 5, init, 1.5);
    const auto source = random_source(g, 6);
    const auto entities = random_entities(g, 5, 3);
    writer::BeamOptions options;
    options.beam = 1;
    options.max_len = 10;
    if (writer::beam_search(m, source, entities, sets, options).ids !=
        testing::greedy_decode(m, source, entities, sets, options.max_len))
      ++greedy_mismatch;
  }
  const bool pass = overlap_mismatch == 0 && propagate_mismatch == 0 && greedy_mismatch == 0;
  return {pass, "mismatches: overlap " + std::to_string(overlap_mismatch) + "/1000, propagation " +
                    std::to_string(propagate_mismatch) + "/25, greedy " + std::to_string(greedy_mismatch) + "/20"};
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / ("scidraft_acceptance_" + std::to_string(::getpid()));
  const std::vector<std::string> config{"--config", (kToy / "toy.conf").string(), "--set", "link_epochs=20",
                                        "--set", "writer_epochs=20"};
  auto pipeline = [&](const fs::path& w) -> std::string {
    fs::remove_all(w);
    fs::create_directories(w);
    auto step = [&](std::vector<std::string> args) {
      args.insert(args.begin(), config.begin(), config.end());
      args.insert(args.begin(), "scidraft");
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      return cli::run(static_cast<int>(argv.size()), argv.data(), out, err) == cli::kExitOk;
    };
    const std::string g = (w / "graph.tsv").string(), s = (w / "sentences.jsonl").string();
    if (!step({"ingest", "--triples", (kToy / "triples.tsv").string(), "--sentences",
               (kToy / "sentences.jsonl").string(), "--papers", (kToy / "papers.jsonl").string(), "--out", w.string()}))
      return "ingest";
    if (!step({"train-link", "--graph", g, "--sentences", s, "--out", (w / "link.bin").string()})) return "train-link";
    if (!step({"enrich", "--graph", g, "--sentences", s, "--model", (w / "link.bin").string(), "--out",
               (w / "enriched.tsv").string()}))
      return "enrich";
    for (const std::string task : {"title2abstract", "abstract2conclusion", "conclusion2title"}) {
      if (!step({"train-writer", "--task", task, "--corpus", (w / (task + ".jsonl")).string(), "--graph",
                 (w / "enriched.tsv").string(), "--out", (w / (task + ".bin")).string()}))
        return "train-writer " + task;
    }
    if (!step({"generate", "--graph", (w / "enriched.tsv").string(), "--title2abstract",
               (w / "title2abstract.bin").string(), "--abstract2conclusion", (w / "abstract2conclusion.bin").string(),
               "--conclusion2title", (w / "conclusion2title.bin").string(), "--titles", (kToy / "titles.txt").string(),
               "--out", (w / "records.jsonl").string()}))
      return "generate";
    return "";
  };
  for (const auto& dir : {root / "first", root / "second"}) {
    const std::string failed = pipeline(dir);
    if (!failed.empty()) return {false, "stage " + failed + " failed"};
  }
  std::size_t differing = 0, bytes = 0;
  const std::vector<std::string> artifacts{"link.bin", "enriched.tsv", "title2abstract.bin",
                                           "abstract2conclusion.bin", "conclusion2title.bin", "records.jsonl"};
  for (const auto& name : artifacts) {
    const std::string a = read_bytes(root / "first" / name);
    bytes += a.size();
    differing += a.empty() || a != read_bytes(root / "second" / name);
  }
  fs::remove_all(root);
  return {differing == 0, std::to_string(artifacts.size() - differing) + "/" + std::to_string(artifacts.size()) +
                              " artifacts byte-identical (" + std::to_string(bytes) + " bytes)"};
}

class UniformProvider : public eval::TokenDistributionProvider {
 public:
  explicit UniformProvider(std::size_t v) : v_(v) {}
  std::size_t sequence_count() const override { return 3; }
  std::vector<long double> gold_log_probabilities(std::size_t) const override {
    return std::vector<long double>(5, -std::log(static_cast<long double>(v_)));
  }

 private:
  std::size_t v_;
};

Verdict analytic_values() {
  std::vector<std::string> failed;
  for (std::size_t v : {1, 2, 3, 7, 146, 1000, 50000}) {
    if (eval::perplexity(UniformProvider(v)) != static_cast<double>(v)) failed.push_back("uniform " + std::to_string(v));
  }
  if (nx::softmax(Tensor::vector({0.0, 0.0})) != Tensor::vector({0.5, 0.5})) failed.push_back("softmax(0,0)");
  if (nx::softmax(Tensor::vector({1000.0, 1000.0})) != Tensor::vector({0.5, 0.5})) failed.push_back("softmax large");
  if (nx::softmax(Tensor::vector({-3.0, -3.0, -3.0, -3.0})) != Tensor::vector({0.25, 0.25, 0.25, 0.25}))
    failed.push_back("softmax equal four");
  const Tensor ab = nx::softmax(Tensor::vector({0.3, -1.7})), ba = nx::softmax(Tensor::vector({-1.7, 0.3}));
  if (ab[0] != ba[1] || ab[1] != ba[0]) failed.push_back("softmax swap");
  const Tensor shifted = nx::softmax(Tensor::vector({0.3 + 5.0, -1.7 + 5.0}));
  if (std::abs(shifted[0] - ab[0]) > 1e-15) failed.push_back("softmax shift");
  if (nx::sigmoid(0.0) != 0.5) failed.push_back("sigmoid(0)");

  Rng init(1);
  writer::WriterModel m = writer::create_writer_model(small_config(4, 6, 2), "t", pool_vocab(), 3, init, 0.0);
  const std::vector<EntityMemory> entities{{0, {"zinc"}}, {2, {"novel", "kinase"}}};
  const writer::DecoderSession session(m, words("zinc binds cells"), entities);
  const auto d = session.step(session.initial_state());
  if (d.gate != 0.5 || d.copy_gate != 0.5) failed.push_back("zero-weight gates");
  // Half the mass is generated, a quarter copied from each of title and entities.
  if (std::abs(sum_of(d.generated) - 0.5) > 1e-15 || std::abs(sum_of(d.copied_reference) - 0.25) > 1e-15 ||
      std::abs(sum_of(d.copied_entity) - 0.25) > 1e-15)
    failed.push_back("zero-weight branch mass");
  // Uniform generation over the vocabulary, uniform attention over three positions.
  const double word = 0.5 / static_cast<double>(m.vocab.size()) + 0.25 / 3.0;
  if (std::abs(d.probabilities[session.layout().id("cells")] - word) > 1e-15) failed.push_back("zero-weight word mass");
  std::string detail = failed.empty() ? "all spot values exact" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"distribution soundness", distribution_soundness},
      {"coverage semantics", coverage_semantics},
      {"memorization", memorization},
      {"repetition guarantee", repetition_guarantee},
      {"copy-mode containment", copy_containment},
      {"link-prediction sanity", link_sanity},
      {"oracle equivalence", oracle_equivalence},
      {"determinism", determinism},
      {"analytic spot values", analytic_values},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  std::size_t failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s  %2zu  %-24s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
