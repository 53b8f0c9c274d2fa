#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scidraft/kg/context.hpp"
#include "scidraft/kg/graph.hpp"
#include "scidraft/numerics/gru.hpp"
#include "scidraft/numerics/random.hpp"
#include "scidraft/numerics/tape.hpp"

namespace scidraft::link {

using kg::EntityId;
using kg::RelationId;
using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

struct LinkConfig {
  std::size_t entity_dim = 64;    // entity and relation embeddings, triple space
  std::size_t heads = 8;
  std::size_t head_hidden = 8;    // graph vector = heads * head_hidden
  std::size_t text_emb = 128;
  std::size_t text_hidden = 64;   // per GRU direction
  std::size_t text_dim = 64;
  double leaky_relu_alpha = 0.2;
  double margin = 1.0;

  std::size_t graph_dim() const { return heads * head_hidden; }
  std::size_t combined_dim() const { return graph_dim() + text_dim; }
};

struct AttentionHead {
  Parameter weight;     // [head_hidden, entity_dim]
  Parameter attention;  // [2 * head_hidden]: source half then neighbour half
};

// All learnable state of the link predictor plus the token vocabulary of the
// context encoder (index 0 is the unknown token).
class LinkPredictParams {
 public:
  LinkPredictParams() = default;
  LinkPredictParams(LinkConfig config, std::size_t entity_count, std::size_t relation_count,
                    std::vector<std::string> text_vocab);

  const LinkConfig& config() const noexcept { return config_; }
  std::size_t entity_count() const noexcept { return entity_count_; }
  std::size_t relation_count() const noexcept { return relation_count_; }
  const std::vector<std::string>& text_vocab() const noexcept { return text_vocab_; }
  std::size_t token_id(const std::string& token) const;

  void initialize(numerics::Rng& rng, double scale);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  Parameter entity_embeddings;    // [entities, entity_dim]
  Parameter relation_embeddings;  // [relations, entity_dim]
  std::vector<AttentionHead> heads;
  Parameter token_embeddings;     // [vocab, text_emb]
  numerics::GruParams text_forward;
  numerics::GruParams text_backward;
  Parameter text_projection;      // [text_dim, 2 * text_hidden]
  Parameter text_bias;            // [text_dim]
  Parameter triple_projection;    // [entity_dim, combined_dim]

 private:
  LinkConfig config_;
  std::size_t entity_count_ = 0;
  std::size_t relation_count_ = 0;
  std::vector<std::string> text_vocab_;
  std::unordered_map<std::string, std::size_t> token_index_;
};

// Distinct context tokens in lexical order, preceded by the unknown token.
std::vector<std::string> build_text_vocab(const kg::ContextIndex& context);

// Sets up parameters sized for graph and context and initialises them.
LinkPredictParams create_link_params(const LinkConfig& config, const kg::KnowledgeGraph& graph,
                                     const kg::ContextIndex& context, numerics::Rng& rng, double init_scale);

// Differentiable entity encoders recorded on one tape. Sentence encodings and
// entity vectors are cached, so each is computed once per encoder. When built
// from a mutable parameter set, gradients flow into it.
class EntityEncoder {
 public:
  EntityEncoder(numerics::Tape& tape, LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                const kg::ContextIndex& context);
  EntityEncoder(numerics::Tape& tape, const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                const kg::ContextIndex& context);

  Var graph_vector(EntityId e);
  Var text_vector(EntityId e);
  // [graph_vector, text_vector]
  Var combined(EntityId e);
  // Negative L2 distance between projected head plus relation and projected tail.
  Var score(Var head_combined, RelationId relation, Var tail_combined);

 private:
  Var leaf(const Parameter& p);
  Var sentence_vector(kg::SentenceId sid);

  numerics::Tape& tape_;
  const LinkPredictParams& params_;
  LinkPredictParams* trainable_ = nullptr;
  const kg::KnowledgeGraph& graph_;
  const kg::ContextIndex& context_;
  std::map<EntityId, Var> graph_cache_;
  std::map<EntityId, Var> text_cache_;
  std::map<kg::SentenceId, Var> sentence_cache_;
  numerics::GruBinding forward_;
  numerics::GruBinding backward_;
  bool gru_bound_ = false;
};

struct EntityRepresentation {
  Tensor graph_vector;
  Tensor text_vector;
  Tensor combined;
};

EntityRepresentation encode_entity(const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                                   const kg::ContextIndex& context, EntityId e);
// Representations of every entity, indexed by id.
std::vector<EntityRepresentation> encode_all(const LinkPredictParams& params, const kg::KnowledgeGraph& graph,
                                             const kg::ContextIndex& context);

// Throws std::out_of_range for an unknown relation.
double score_triple(const LinkPredictParams& params, const Tensor& head_combined, RelationId relation,
                    const Tensor& tail_combined);

// Cosine similarity; 0 when either vector is zero.
double entity_similarity(const Tensor& a, const Tensor& b);

// Model file: magic "SDLINK01", version 1 (see docs/formats.md).
void write_link_model(std::ostream& out, const LinkPredictParams& params);
LinkPredictParams read_link_model(std::istream& in);

}  // namespace scidraft::link
