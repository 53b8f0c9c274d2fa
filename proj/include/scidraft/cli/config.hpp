#pragma once

// Run configuration: one `key = value` per line, '#' starts a comment.
// Missing keys keep their defaults; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scidraft/link/model.hpp"
#include "scidraft/writer/model.hpp"

namespace scidraft::cli {

struct Config {
  // Link predictor.
  std::uint64_t heads = 8;
  std::uint64_t head_hidden = 8;
  std::uint64_t entity_emb = 64;
  double leaky_relu_alpha = 0.2;
  double margin = 1.0;
  std::uint64_t text_hidden = 64;
  std::uint64_t text_dim = 64;
  std::uint64_t link_epochs = 200;
  std::uint64_t link_batch = 8;
  double similarity_threshold = 0.95;
  std::uint64_t related_limit = 10;

  // Writer.
  std::uint64_t text_emb = 128;
  std::uint64_t decoder_hidden = 256;
  std::uint64_t attention_dim = 0;  // 0: same as decoder_hidden
  double coverage_lambda = 1.0;
  std::uint64_t init_hops = 3;
  std::uint64_t memory_hops = 3;
  std::uint64_t beam = 4;
  std::uint64_t max_len = 120;
  std::uint64_t oov_floor = 5;
  std::uint64_t writer_epochs = 100;
  double target_perplexity = 0.0;  // 0: train for all epochs
  std::string stopwords;           // word-list file; empty for the built-in list

  // Shared.
  double learning_rate = 0.001;
  std::string optimizer = "adam";
  double init_scale = 0.08;
  std::uint64_t seed = 1;

  bool operator==(const Config&) const = default;
};

using ConfigField = std::variant<std::uint64_t Config::*, double Config::*, std::string Config::*>;

struct ConfigKey {
  std::string_view name;
  ConfigField field;
};

// Every key, in file order.
std::span<const ConfigKey> config_keys();

// Throws ConfigError naming the key for an unknown key, a malformed value or
// an out-of-range value.
void set_value(Config& config, std::string_view key, std::string_view value);
Config parse_config(std::istream& in, std::string_view source = "<config>");
// A missing file raises ConfigError for key "config".
Config load_config(const std::filesystem::path& path);
void validate(const Config& config);

std::string value_string(const Config& config, const ConfigKey& key);
// Keys whose values differ from the defaults, with their values.
std::vector<std::pair<std::string, std::string>> overrides(const Config& config);
nlohmann::json to_json(const Config& config);
// SHA-256 of the canonical JSON form.
std::string config_hash(const Config& config);

link::LinkConfig link_config(const Config& config);
writer::WriterConfig writer_config(const Config& config);

}  // namespace scidraft::cli
