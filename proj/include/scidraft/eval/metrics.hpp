#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

namespace scidraft::eval {

// Supplies, for each sequence of a corpus, the natural log of the probability
// the model gave each gold token (end marker included) given the gold prefix.
// Extended precision lets a uniform model report exactly -ln V.
class TokenDistributionProvider {
 public:
  virtual ~TokenDistributionProvider() = default;
  virtual std::size_t sequence_count() const = 0;
  virtual std::vector<long double> gold_log_probabilities(std::size_t sequence) const = 0;
};

// exp of the mean negative log-probability over all gold tokens. Returns
// +infinity when any gold token has probability zero (log of -infinity). Throws
// std::invalid_argument when the corpus holds no tokens.
double perplexity(const TokenDistributionProvider& model);

struct Overlap {
  double percentage = 0.0;
  bool input_too_short = false;  // fewer than n input tokens; percentage is 0
};

// Share of the distinct n-grams of input that also occur in output, in
// percent. Throws std::invalid_argument for n = 0.
Overlap ngram_overlap(std::span<const std::string> input, std::span<const std::string> output, std::size_t n);

// Splits after '.', '!' or '?' when followed by whitespace or the end.
std::vector<std::string> split_sentences(std::string_view text);

using SentenceSplitter = std::function<std::vector<std::string>(std::string_view)>;

// Fraction of sentences in which some lexicon token occurs at least twice.
// Tokens are whitespace separated, lowercased and stripped of surrounding
// punctuation before lookup. Throws std::invalid_argument for an empty lexicon.
double repetition_rate(std::string_view text, const std::unordered_set<std::string>& lexicon,
                       const SentenceSplitter& splitter = split_sentences);

struct BleuRouge {
  std::vector<double> bleu;  // cumulative BLEU-1 .. BLEU-max_n
  double rouge_l = 0.0;
};

// Sentence-level BLEU with brevity penalty; for n >= 2 a zero match count
// becomes (0 + 1) / (total + 1). ROUGE-L is the LCS F1. An empty candidate
// scores zero everywhere; an empty reference or max_n = 0 throws
// std::invalid_argument.
BleuRouge bleu_rouge(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n = 4);

struct MetricReport {
  std::string metric;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> corpora;
  nlohmann::json parameters = nlohmann::json::object();
};

nlohmann::json to_json(const MetricReport& report);

}  // namespace scidraft::eval
