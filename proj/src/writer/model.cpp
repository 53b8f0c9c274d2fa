#include "scidraft/writer/model.hpp"

#include <stdexcept>

#include "scidraft/error.hpp"
#include "scidraft/numerics/param_io.hpp"

namespace scidraft::writer {

namespace {

constexpr const char* kMagic = "SDWRIT01";
constexpr std::uint32_t kVersion = 1;

MemoryHop make_hop(const std::string& prefix, std::size_t hidden) {
  return MemoryHop{Parameter(prefix + ".query", {hidden, hidden}), Parameter(prefix + ".memory", {hidden, hidden}),
                   Parameter(prefix + ".bias", {hidden}), Parameter(prefix + ".score", {hidden})};
}

}  // namespace

WriterParams::WriterParams(const WriterConfig& c, std::size_t vocab_size, std::size_t entity_count)
    : token_embeddings("writer.token_embeddings", {vocab_size, c.embedding}),
      encoder_forward("writer.encoder_forward", c.embedding, c.hidden / 2),
      encoder_backward("writer.encoder_backward", c.embedding, c.hidden / 2),
      decoder("writer.decoder", c.embedding, c.hidden),
      entity_embeddings("writer.entity_embeddings", {entity_count, c.hidden}),
      memory_coverage("writer.memory_coverage", {c.hidden}),
      attention_decoder("writer.attention.decoder", {c.attention_dim(), c.hidden}),
      attention_reference("writer.attention.reference", {c.attention_dim(), c.hidden}),
      attention_coverage("writer.attention.coverage", {c.attention_dim()}),
      attention_bias("writer.attention.bias", {c.attention_dim()}),
      attention_score("writer.attention.score", {c.attention_dim()}),
      generator_weight("writer.generator.weight", {vocab_size, 3 * c.hidden}),
      generator_bias("writer.generator.bias", {vocab_size}),
      gate_decoder("writer.gate.decoder", {c.hidden}),
      gate_previous("writer.gate.previous", {c.embedding}),
      gate_bias("writer.gate.bias", {1}),
      copy_gate_context("writer.copy_gate.context", {c.hidden}),
      copy_gate_memory("writer.copy_gate.memory", {c.hidden}),
      copy_gate_bias("writer.copy_gate.bias", {1}) {
  if (c.embedding == 0 || c.hidden == 0 || c.hidden % 2 != 0) {
    throw std::invalid_argument("writer dimensions must be positive with an even hidden size");
  }
  if (vocab_size < kSpecialCount) throw std::invalid_argument("writer vocabulary lacks special tokens");
  for (std::size_t k = 0; k < c.init_hops; ++k) init_hops.push_back(make_hop("writer.init_hop" + std::to_string(k), c.hidden));
  for (std::size_t k = 0; k < c.memory_hops; ++k) {
    memory_hops.push_back(make_hop("writer.memory_hop" + std::to_string(k), c.hidden));
  }
}

std::vector<Parameter*> WriterParams::parameters() {
  std::vector<Parameter*> out{&token_embeddings};
  for (auto* gru : {&encoder_forward, &encoder_backward, &decoder}) {
    for (Parameter* p : gru->parameters()) out.push_back(p);
  }
  out.push_back(&entity_embeddings);
  for (auto* hops : {&init_hops, &memory_hops}) {
    for (MemoryHop& h : *hops) out.insert(out.end(), {&h.query, &h.memory, &h.bias, &h.score});
  }
  out.insert(out.end(), {&memory_coverage, &attention_decoder, &attention_reference, &attention_coverage,
                         &attention_bias, &attention_score, &generator_weight, &generator_bias, &gate_decoder,
                         &gate_previous, &gate_bias, &copy_gate_context, &copy_gate_memory, &copy_gate_bias});
  return out;
}

std::vector<const Parameter*> WriterParams::parameters() const {
  auto list = const_cast<WriterParams*>(this)->parameters();
  return {list.begin(), list.end()};
}

WriterModel create_writer_model(const WriterConfig& config, std::string task, Vocabulary vocab,
                                std::size_t entity_count, numerics::Rng& rng, double init_scale) {
  WriterModel model{config, std::move(task), std::move(vocab), {}, entity_count};
  model.params = WriterParams(config, model.vocab.size(), entity_count);
  const auto list = model.params.parameters();
  numerics::init_uniform(list, rng, init_scale);
  return model;
}

void write_writer_model(std::ostream& out, const WriterModel& model) {
  const WriterConfig& c = model.config;
  nlohmann::json header;
  header["task"] = model.task;
  header["config"] = {{"embedding", c.embedding},     {"hidden", c.hidden},
                      {"attention", c.attention},     {"init_hops", c.init_hops},
                      {"memory_hops", c.memory_hops}, {"coverage_lambda", c.coverage_lambda},
                      {"max_len", c.max_len}};
  header["entity_count"] = model.entity_count;
  header["vocab"] = model.vocab.tokens();
  const auto list = model.params.parameters();
  numerics::write_parameter_file(out, kMagic, kVersion, std::move(header), list);
}

WriterModel read_writer_model(std::istream& in) {
  numerics::ParameterFileReader reader(in, kMagic, kVersion);
  const auto& h = reader.header();
  try {
    const auto& c = h.at("config");
    WriterModel model;
    model.config.embedding = c.at("embedding").get<std::size_t>();
    model.config.hidden = c.at("hidden").get<std::size_t>();
    model.config.attention = c.at("attention").get<std::size_t>();
    model.config.init_hops = c.at("init_hops").get<std::size_t>();
    model.config.memory_hops = c.at("memory_hops").get<std::size_t>();
    model.config.coverage_lambda = c.at("coverage_lambda").get<double>();
    model.config.max_len = c.at("max_len").get<std::size_t>();
    model.task = h.at("task").get<std::string>();
    model.entity_count = h.at("entity_count").get<std::size_t>();
    model.vocab = Vocabulary(h.at("vocab").get<std::vector<std::string>>());
    model.params = WriterParams(model.config, model.vocab.size(), model.entity_count);
    auto list = model.params.parameters();
    reader.read_values(list);
    for (Parameter* p : list) p->zero_grad();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("writer model header is malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("writer model header is malformed: ") + e.what());
  }
}

}  // namespace scidraft::writer
