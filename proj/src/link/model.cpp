#include "scidraft/link/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "scidraft/error.hpp"
#include "scidraft/numerics/ops.hpp"
#include "scidraft/numerics/param_io.hpp"

namespace scidraft::link {

namespace nx = scidraft::numerics;

namespace {

constexpr const char* kMagic = "SDLINK01";
constexpr std::uint32_t kVersion = 1;

}  // namespace

LinkPredictParams::LinkPredictParams(LinkConfig config, std::size_t entity_count, std::size_t relation_count,
                                     std::vector<std::string> text_vocab)
    : entity_embeddings("link.entity_embeddings", {entity_count, config.entity_dim}),
      relation_embeddings("link.relation_embeddings", {relation_count, config.entity_dim}),
      text_forward("link.text_forward", config.text_emb, config.text_hidden),
      text_backward("link.text_backward", config.text_emb, config.text_hidden),
      text_projection("link.text_projection", {config.text_dim, 2 * config.text_hidden}),
      text_bias("link.text_bias", {config.text_dim}),
      triple_projection("link.triple_projection", {config.entity_dim, config.combined_dim()}),
      config_(config),
      entity_count_(entity_count),
      relation_count_(relation_count),
      text_vocab_(std::move(text_vocab)) {
  if (config.entity_dim == 0 || config.heads == 0 || config.head_hidden == 0 || config.text_emb == 0 ||
      config.text_hidden == 0 || config.text_dim == 0) {
    throw std::invalid_argument("link model dimensions must be positive");
  }
  if (text_vocab_.empty()) text_vocab_.push_back("<unk>");
  for (std::size_t k = 0; k < config.heads; ++k) {
    const std::string prefix = "link.head" + std::to_string(k);
    heads.push_back(AttentionHead{Parameter(prefix + ".weight", {config.head_hidden, config.entity_dim}),
                                  Parameter(prefix + ".attention", {2 * config.head_hidden})});
  }
  token_embeddings = Parameter("link.token_embeddings", {text_vocab_.size(), config.text_emb});
  for (std::size_t i = 0; i < text_vocab_.size(); ++i) token_index_.emplace(text_vocab_[i], i);
}

std::size_t LinkPredictParams::token_id(const std::string& token) const {
  auto it = token_index_.find(token);
  return it == token_index_.end() ? 0 : it->second;
}

void LinkPredictParams::initialize(nx::Rng& rng, double scale) {
  const auto params = parameters();
  nx::init_uniform(params, rng, scale);
}

std::vector<Parameter*> LinkPredictParams::parameters() {
  std::vector<Parameter*> out{&entity_embeddings, &relation_embeddings};
  for (auto& h : heads) {
    out.push_back(&h.weight);
    out.push_back(&h.attention);
  }
  out.push_back(&token_embeddings);
  for (Parameter* p : text_forward.parameters()) out.push_back(p);
  for (Parameter* p : text_backward.parameters()) out.push_back(p);
  out.insert(out.end(), {&text_projection, &text_bias, &triple_projection});
  return out;
}

std::vector<const Parameter*> LinkPredictParams::parameters() const {
  auto mutable_list = const_cast<LinkPredictParams*>(this)->parameters();
  return {mutable_list.begin(), mutable_list.end()};
}

std::vector<std::string> build_text_vocab(const kg::ContextIndex& context) {
  std::set<std::string> distinct;
  for (kg::SentenceId sid : context.sentence_ids()) {
    for (const auto& t : context.tokens(sid)) distinct.insert(t);
  }
  std::vector<std::string> vocab{"<unk>"};
  distinct.erase("<unk>");
  vocab.insert(vocab.end(), distinct.begin(), distinct.end());
  return vocab;
}

LinkPredictParams create_link_params(const LinkConfig& config, const kg::KnowledgeGraph& graph,
                                     const kg::ContextIndex& context, nx::Rng& rng, double init_scale) {
  LinkPredictParams params(config, graph.entity_count(), graph.relation_count(), build_text_vocab(context));
  params.initialize(rng, init_scale);
  return params;
}

// ---------------------------------------------------------------------------

EntityEncoder::EntityEncoder(nx::Tape& tape, LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                             const kg::ContextIndex& context)
    : tape_(tape), params_(params), trainable_(&params), graph_(graph), context_(context) {}

EntityEncoder::EntityEncoder(nx::Tape& tape, const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                             const kg::ContextIndex& context)
    : tape_(tape), params_(params), graph_(graph), context_(context) {}

Var EntityEncoder::leaf(const Parameter& p) {
  // p is a member of *trainable_ whenever trainable_ is set.
  return trainable_ ? tape_.param(const_cast<Parameter&>(p)) : tape_.param(p);
}

Var EntityEncoder::graph_vector(EntityId e) {
  if (auto it = graph_cache_.find(e); it != graph_cache_.end()) return it->second;
  if (e >= params_.entity_count()) throw std::out_of_range("entity id outside the link model");

  std::set<EntityId> tails;
  for (const kg::Edge& edge : graph_.neighbors(e)) {
    if (edge.tail != e) tails.insert(edge.tail);
  }
  const Var embeddings = leaf(params_.entity_embeddings);
  std::vector<Var> rows{nx::row(embeddings, e)};
  for (EntityId t : tails) rows.push_back(nx::row(embeddings, t));
  const Var nodes = nx::stack_rows(rows);
  const Var ones = tape_.constant(Tensor({rows.size()}, 1.0));

  const std::size_t hidden = params_.config().head_hidden;
  std::vector<Var> outputs;
  for (const AttentionHead& head : params_.heads) {
    const Var projected = nx::matmul_transposed(nodes, leaf(head.weight));
    const Var a = leaf(head.attention);
    const Var source = nx::dot(nx::slice(a, 0, hidden), nx::row(projected, 0));
    const Var scores = nx::add(nx::matvec(projected, nx::slice(a, hidden, hidden)), nx::mul_scalar(ones, source));
    const Var weights = nx::softmax(nx::leaky_relu(scores, params_.config().leaky_relu_alpha));
    outputs.push_back(nx::vecmat(weights, projected));
  }
  const Var out = nx::concat(outputs);
  graph_cache_.emplace(e, out);
  return out;
}

Var EntityEncoder::sentence_vector(kg::SentenceId sid) {
  if (auto it = sentence_cache_.find(sid); it != sentence_cache_.end()) return it->second;
  if (!gru_bound_) {
    if (trainable_) {
      forward_ = nx::bind(tape_, trainable_->text_forward);
      backward_ = nx::bind(tape_, trainable_->text_backward);
    } else {
      forward_ = nx::bind(tape_, params_.text_forward);
      backward_ = nx::bind(tape_, params_.text_backward);
    }
    gru_bound_ = true;
  }
  const std::size_t hidden = params_.config().text_hidden;
  const auto& tokens = context_.tokens(sid);
  const Var table = leaf(params_.token_embeddings);
  std::vector<Var> inputs;
  inputs.reserve(tokens.size());
  for (const auto& t : tokens) inputs.push_back(nx::row(table, params_.token_id(t)));

  Var fwd = tape_.constant(Tensor({hidden}));
  Var bwd = fwd;
  for (const Var& x : inputs) fwd = nx::gru_cell(x, fwd, forward_);
  for (auto it = inputs.rbegin(); it != inputs.rend(); ++it) bwd = nx::gru_cell(*it, bwd, backward_);
  const Var out = nx::concat({fwd, bwd});
  sentence_cache_.emplace(sid, out);
  return out;
}

Var EntityEncoder::text_vector(EntityId e) {
  if (auto it = text_cache_.find(e); it != text_cache_.end()) return it->second;
  const auto sentences = context_.sentences_of(e);
  Var out;
  if (sentences.empty()) {
    out = tape_.constant(Tensor({params_.config().text_dim}));
  } else {
    Var total = sentence_vector(sentences.front());
    for (std::size_t i = 1; i < sentences.size(); ++i) total = nx::add(total, sentence_vector(sentences[i]));
    const Var mean = nx::scale(total, 1.0 / static_cast<double>(sentences.size()));
    out = nx::add(nx::matvec(leaf(params_.text_projection), mean), leaf(params_.text_bias));
  }
  text_cache_.emplace(e, out);
  return out;
}

Var EntityEncoder::combined(EntityId e) { return nx::concat({graph_vector(e), text_vector(e)}); }

Var EntityEncoder::score(Var head_combined, RelationId relation, Var tail_combined) {
  if (relation >= params_.relation_count()) throw std::out_of_range("relation id outside the link model");
  const Var projection = leaf(params_.triple_projection);
  const Var translated =
      nx::add(nx::matvec(projection, head_combined), nx::row(leaf(params_.relation_embeddings), relation));
  return nx::scale(nx::l2_norm(nx::sub(translated, nx::matvec(projection, tail_combined))), -1.0);
}

// ---------------------------------------------------------------------------

EntityRepresentation encode_entity(const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                                   const kg::ContextIndex& context, EntityId e) {
  nx::Tape tape;
  EntityEncoder encoder(tape, params, graph, context);
  return {encoder.graph_vector(e).value(), encoder.text_vector(e).value(), encoder.combined(e).value()};
}

std::vector<EntityRepresentation> encode_all(const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                                             const kg::ContextIndex& context) {
  // A fresh tape per block bounds memory while still sharing sentence
  // encodings between entities of the same block.
  constexpr std::size_t kBlock = 256;
  std::vector<EntityRepresentation> reps;
  reps.reserve(graph.entity_count());
  for (std::size_t begin = 0; begin < graph.entity_count(); begin += kBlock) {
    nx::Tape tape;
    EntityEncoder encoder(tape, params, graph, context);
    const std::size_t end = std::min(graph.entity_count(), begin + kBlock);
    for (std::size_t e = begin; e < end; ++e) {
      const auto id = static_cast<EntityId>(e);
      reps.push_back({encoder.graph_vector(id).value(), encoder.text_vector(id).value(),
                      encoder.combined(id).value()});
    }
  }
  return reps;
}

double score_triple(const LinkPredictParams& params, const Tensor& head_combined, RelationId relation,
                    const Tensor& tail_combined) {
  nx::Tape tape;
  const kg::KnowledgeGraph graph;
  const kg::ContextIndex context;
  EntityEncoder encoder(tape, params, graph, context);
  return encoder.score(tape.constant(head_combined), relation, tape.constant(tail_combined)).item();
}

double entity_similarity(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw std::invalid_argument("entity_similarity: vectors differ in length");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

void write_link_model(std::ostream& out, const LinkPredictParams& params) {
  const LinkConfig& c = params.config();
  nlohmann::json header;
  header["config"] = {{"entity_dim", c.entity_dim},   {"heads", c.heads},
                      {"head_hidden", c.head_hidden}, {"text_emb", c.text_emb},
                      {"text_hidden", c.text_hidden}, {"text_dim", c.text_dim},
                      {"leaky_relu_alpha", c.leaky_relu_alpha}, {"margin", c.margin}};
  header["entity_count"] = params.entity_count();
  header["relation_count"] = params.relation_count();
  header["text_vocab"] = params.text_vocab();
  const auto list = params.parameters();
  nx::write_parameter_file(out, kMagic, kVersion, std::move(header), list);
}

LinkPredictParams read_link_model(std::istream& in) {
  nx::ParameterFileReader reader(in, kMagic, kVersion);
  const auto& h = reader.header();
  try {
    const auto& c = h.at("config");
    LinkConfig config;
    config.entity_dim = c.at("entity_dim").get<std::size_t>();
    config.heads = c.at("heads").get<std::size_t>();
    config.head_hidden = c.at("head_hidden").get<std::size_t>();
    config.text_emb = c.at("text_emb").get<std::size_t>();
    config.text_hidden = c.at("text_hidden").get<std::size_t>();
    config.text_dim = c.at("text_dim").get<std::size_t>();
    config.leaky_relu_alpha = c.at("leaky_relu_alpha").get<double>();
    config.margin = c.at("margin").get<double>();
    LinkPredictParams params(config, h.at("entity_count").get<std::size_t>(),
                             h.at("relation_count").get<std::size_t>(),
                             h.at("text_vocab").get<std::vector<std::string>>());
    auto list = params.parameters();
    reader.read_values(list);
    for (Parameter* p : list) p->zero_grad();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("link model header is malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("link model header is malformed: ") + e.what());
  }
}

}  // namespace scidraft::link
