#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "scidraft/numerics/gru.hpp"
#include "scidraft/numerics/random.hpp"
#include "scidraft/numerics/tape.hpp"
#include "scidraft/writer/vocab.hpp"

namespace scidraft::writer {

using numerics::Parameter;
using numerics::Tensor;

struct WriterConfig {
  std::size_t embedding = 128;  // token embeddings
  std::size_t hidden = 256;     // decoder state; the encoder runs hidden/2 per direction
  std::size_t attention = 0;    // reference attention width; 0 means equal to hidden
  std::size_t init_hops = 3;
  std::size_t memory_hops = 3;
  double coverage_lambda = 1.0;
  std::size_t max_len = 120;    // truncation of sources and targets

  std::size_t attention_dim() const { return attention == 0 ? hidden : attention; }
};

// Per-hop weights of a memory network over entity embeddings:
// score_j = score . tanh(query q + memory e_j [+ coverage c_j] + bias).
struct MemoryHop {
  Parameter query;   // [hidden, hidden]
  Parameter memory;  // [hidden, hidden]
  Parameter bias;    // [hidden]
  Parameter score;   // [hidden]
};

class WriterParams {
 public:
  WriterParams() = default;
  WriterParams(const WriterConfig& config, std::size_t vocab_size, std::size_t entity_count);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  Parameter token_embeddings;  // [vocab, embedding]
  numerics::GruParams encoder_forward;
  numerics::GruParams encoder_backward;
  numerics::GruParams decoder;
  Parameter entity_embeddings;  // [entities, hidden]

  std::vector<MemoryHop> init_hops;    // decoder initialisation
  std::vector<MemoryHop> memory_hops;  // per decoding step
  Parameter memory_coverage;           // [hidden], shared by the per-step hops

  // Reference attention.
  Parameter attention_decoder;    // [attention, hidden]
  Parameter attention_reference;  // [attention, hidden]
  Parameter attention_coverage;   // [attention]
  Parameter attention_bias;       // [attention]
  Parameter attention_score;      // [attention]

  Parameter generator_weight;  // [vocab, 3 * hidden]: decoder state, reference context, memory read
  Parameter generator_bias;    // [vocab]

  // Switch between generating and copying.
  Parameter gate_decoder;   // [hidden]
  Parameter gate_previous;  // [embedding]
  Parameter gate_bias;      // [1]
  // Switch between copying from the reference and from the entities.
  Parameter copy_gate_context;  // [hidden]
  Parameter copy_gate_memory;   // [hidden]
  Parameter copy_gate_bias;     // [1]
};

struct WriterModel {
  WriterConfig config;
  std::string task;
  Vocabulary vocab;
  WriterParams params;
  std::size_t entity_count = 0;
};

// Sets up a model for the vocabulary and initialises all weights uniformly
// in [-init_scale, init_scale].
WriterModel create_writer_model(const WriterConfig& config, std::string task, Vocabulary vocab,
                                std::size_t entity_count, numerics::Rng& rng, double init_scale);

// Model file: magic "SDWRIT01", version 1 (see docs/formats.md).
void write_writer_model(std::ostream& out, const WriterModel& model);
WriterModel read_writer_model(std::istream& in);

}  // namespace scidraft::writer
