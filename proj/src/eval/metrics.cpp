#include "scidraft/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace scidraft::eval {

double perplexity(const TokenDistributionProvider& model) {
  // Kahan-compensated sum so a uniform model comes out at exactly V.
  long double sum = 0.0L, carry = 0.0L;
  std::size_t tokens = 0;
  for (std::size_t s = 0; s < model.sequence_count(); ++s) {
    for (long double lp : model.gold_log_probabilities(s)) {
      if (std::isnan(lp) || std::isinf(lp)) return std::numeric_limits<double>::infinity();
      const long double term = -lp - carry;
      const long double next = sum + term;
      carry = (next - sum) - term;
      sum = next;
      ++tokens;
    }
  }
  if (tokens == 0) throw std::invalid_argument("perplexity needs at least one gold token");
  return static_cast<double>(std::exp(sum / static_cast<long double>(tokens)));
}

namespace {

using Gram = std::vector<std::string>;

std::set<Gram> distinct_ngrams(std::span<const std::string> tokens, std::size_t n) {
  std::set<Gram> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) out.emplace(tokens.begin() + i, tokens.begin() + i + n);
  return out;
}

std::map<Gram, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<Gram, std::size_t> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++out[Gram(tokens.begin() + i, tokens.begin() + i + n)];
  return out;
}

}  // namespace

Overlap ngram_overlap(std::span<const std::string> input, std::span<const std::string> output, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n-gram order must be at least 1");
  if (input.size() < n) return Overlap{0.0, true};
  const auto wanted = distinct_ngrams(input, n);
  const auto present = distinct_ngrams(output, n);
  std::size_t hits = 0;
  for (const auto& g : wanted) hits += present.count(g);
  return Overlap{100.0 * static_cast<double>(hits) / static_cast<double>(wanted.size()), false};
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    current += text[i];
    const char c = text[i];
    const bool boundary = (c == '.' || c == '!' || c == '?') &&
                          (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (boundary) {
      out.push_back(current);
      current.clear();
    }
  }
  if (current.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(current);
  return out;
}

namespace {

std::string normalise_token(std::string token) {
  auto punct = [](unsigned char c) { return std::ispunct(c) != 0; };
  while (!token.empty() && punct(token.back())) token.pop_back();
  std::size_t start = 0;
  while (start < token.size() && punct(token[start])) ++start;
  token.erase(0, start);
  for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return token;
}

}  // namespace

double repetition_rate(std::string_view text, const std::unordered_set<std::string>& lexicon,
                       const SentenceSplitter& splitter) {
  if (lexicon.empty()) throw std::invalid_argument("repetition rate needs a non-empty entity lexicon");
  const auto sentences = splitter(text);
  if (sentences.empty()) return 0.0;
  std::size_t repeated = 0;
  for (const auto& sentence : sentences) {
    std::unordered_map<std::string, std::size_t> seen;
    std::istringstream in(sentence);
    bool hit = false;
    for (std::string word; in >> word && !hit;) {
      const std::string token = normalise_token(word);
      if (lexicon.count(token) && ++seen[token] >= 2) hit = true;
    }
    repeated += hit;
  }
  return static_cast<double>(repeated) / static_cast<double>(sentences.size());
}

namespace {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

BleuRouge bleu_rouge(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n) {
  if (reference.empty()) throw std::invalid_argument("BLEU/ROUGE need a non-empty reference");
  if (max_n == 0) throw std::invalid_argument("BLEU order must be at least 1");
  BleuRouge out;
  out.bleu.assign(max_n, 0.0);
  if (candidate.empty()) return out;

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c >= r ? 1.0 : std::exp(1.0 - r / c);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t total = 0, matches = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    double precision;
    if (matches > 0) {
      precision = static_cast<double>(matches) / static_cast<double>(total);
    } else if (n >= 2) {
      precision = 1.0 / static_cast<double>(total + 1);
    } else {
      precision = 0.0;
    }
    if (precision == 0.0) zero = true;
    if (!zero) log_sum += std::log(precision);
    out.bleu[n - 1] = zero ? 0.0 : brevity * std::exp(log_sum / static_cast<double>(n));
  }

  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs > 0) {
    const double p = lcs / c, rec = lcs / r;
    out.rouge_l = 2.0 * p * rec / (p + rec);
  }
  return out;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [name, v] : report.values) {
    values[name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "nan");
  }
  return {{"metric", report.metric}, {"values", values}, {"corpora", report.corpora}, {"parameters", report.parameters}};
}

}  // namespace scidraft::eval
