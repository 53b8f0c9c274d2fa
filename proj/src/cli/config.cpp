#include "scidraft/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "scidraft/cli/manifest.hpp"
#include "scidraft/error.hpp"

namespace scidraft::cli {

namespace {

constexpr ConfigKey kKeys[] = {
    {"heads", &Config::heads},
    {"head_hidden", &Config::head_hidden},
    {"entity_emb", &Config::entity_emb},
    {"leaky_relu_alpha", &Config::leaky_relu_alpha},
    {"margin", &Config::margin},
    {"text_hidden", &Config::text_hidden},
    {"text_dim", &Config::text_dim},
    {"link_epochs", &Config::link_epochs},
    {"link_batch", &Config::link_batch},
    {"similarity_threshold", &Config::similarity_threshold},
    {"related_limit", &Config::related_limit},
    {"text_emb", &Config::text_emb},
    {"decoder_hidden", &Config::decoder_hidden},
    {"attention_dim", &Config::attention_dim},
    {"coverage_lambda", &Config::coverage_lambda},
    {"init_hops", &Config::init_hops},
    {"memory_hops", &Config::memory_hops},
    {"beam", &Config::beam},
    {"max_len", &Config::max_len},
    {"oov_floor", &Config::oov_floor},
    {"writer_epochs", &Config::writer_epochs},
    {"target_perplexity", &Config::target_perplexity},
    {"stopwords", &Config::stopwords},
    {"learning_rate", &Config::learning_rate},
    {"optimizer", &Config::optimizer},
    {"init_scale", &Config::init_scale},
    {"seed", &Config::seed},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text, const char* what) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key), "expected " + std::string(what) + ", got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

void set_value(Config& config, std::string_view key, std::string_view value) {
  for (const ConfigKey& k : kKeys) {
    if (k.name != key) continue;
    std::visit(
        [&](auto field) {
          using T = std::remove_reference_t<decltype(config.*field)>;
          if constexpr (std::is_same_v<T, std::uint64_t>) {
            config.*field = parse_number<std::uint64_t>(key, value, "a non-negative integer");
          } else if constexpr (std::is_same_v<T, double>) {
            config.*field = parse_number<double>(key, value, "a number");
          } else {
            config.*field = std::string(value);
          }
        },
        k.field);
    return;
  }
  throw ConfigError(std::string(key), "unknown key");
}

Config parse_config(std::istream& in, std::string_view source) {
  Config config;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(trim(text)), std::string(source) + ":" + std::to_string(number) +
                                                     ": expected 'key = value'");
    }
    set_value(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  validate(config);
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in, path.string());
}

void validate(const Config& c) {
  auto positive = [](const char* key, std::uint64_t v) {
    if (v == 0) throw ConfigError(key, "must be at least 1");
  };
  positive("heads", c.heads);
  positive("head_hidden", c.head_hidden);
  positive("entity_emb", c.entity_emb);
  positive("text_hidden", c.text_hidden);
  positive("text_dim", c.text_dim);
  positive("link_batch", c.link_batch);
  positive("related_limit", c.related_limit);
  positive("text_emb", c.text_emb);
  positive("decoder_hidden", c.decoder_hidden);
  positive("memory_hops", c.memory_hops);
  positive("beam", c.beam);
  positive("max_len", c.max_len);
  positive("oov_floor", c.oov_floor);
  if (c.decoder_hidden % 2 != 0) throw ConfigError("decoder_hidden", "must be even (split over two directions)");
  if (!(c.similarity_threshold > 0.0 && c.similarity_threshold <= 1.0))
    throw ConfigError("similarity_threshold", "must lie in (0, 1]");
  if (!(c.margin > 0.0)) throw ConfigError("margin", "must be positive");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (c.coverage_lambda < 0.0) throw ConfigError("coverage_lambda", "must not be negative");
  if (c.init_scale < 0.0) throw ConfigError("init_scale", "must not be negative");
  if (c.target_perplexity < 0.0) throw ConfigError("target_perplexity", "must not be negative");
  if (c.optimizer != "adam") throw ConfigError("optimizer", "only 'adam' is supported");
}

std::string value_string(const Config& config, const ConfigKey& key) {
  return std::visit(
      [&](auto field) -> std::string {
        using T = std::remove_cvref_t<decltype(config.*field)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return config.*field;
        } else if constexpr (std::is_same_v<T, double>) {
          char buffer[32];
          const auto end = std::to_chars(buffer, buffer + sizeof buffer, config.*field).ptr;
          return std::string(buffer, end);
        } else {
          return std::to_string(config.*field);
        }
      },
      key.field);
}

std::vector<std::pair<std::string, std::string>> overrides(const Config& config) {
  const Config defaults;
  std::vector<std::pair<std::string, std::string>> out;
  for (const ConfigKey& k : kKeys) {
    const std::string v = value_string(config, k);
    if (v != value_string(defaults, k)) out.emplace_back(std::string(k.name), v);
  }
  return out;
}

nlohmann::json to_json(const Config& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const ConfigKey& k : kKeys) {
    std::visit([&](auto field) { j[std::string(k.name)] = config.*field; }, k.field);
  }
  return j;
}

std::string config_hash(const Config& config) { return sha256_hex(to_json(config).dump()); }

link::LinkConfig link_config(const Config& c) {
  link::LinkConfig out;
  out.entity_dim = c.entity_emb;
  out.heads = c.heads;
  out.head_hidden = c.head_hidden;
  out.text_emb = c.text_emb;
  out.text_hidden = c.text_hidden;
  out.text_dim = c.text_dim;
  out.leaky_relu_alpha = c.leaky_relu_alpha;
  out.margin = c.margin;
  return out;
}

writer::WriterConfig writer_config(const Config& c) {
  writer::WriterConfig out;
  out.embedding = c.text_emb;
  out.hidden = c.decoder_hidden;
  out.attention = c.attention_dim;
  out.init_hops = c.init_hops;
  out.memory_hops = c.memory_hops;
  out.coverage_lambda = c.coverage_lambda;
  out.max_len = c.max_len;
  return out;
}

}  // namespace scidraft::cli
