#include "scidraft/writer/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace scidraft::writer {

namespace {

std::vector<std::string> special_tokens() {
  return {std::string(kPadToken), std::string(kBosToken), std::string(kEosToken), std::string(kUnkToken)};
}

bool is_special(std::string_view token) {
  return token == kPadToken || token == kBosToken || token == kEosToken || token == kUnkToken;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(special_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto specials = special_tokens();
  if (tokens_.size() < kSpecialCount || !std::equal(specials.begin(), specials.end(), tokens_.begin())) {
    throw std::invalid_argument("vocabulary must begin with the special tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> texts, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (const auto& t : text) {
      if (!is_special(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= std::max<std::size_t>(min_count, 1)) kept.emplace_back(token, count);
  }
  // counts is already in lexical order, so a stable sort on frequency keeps it for ties.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  auto tokens = special_tokens();
  for (auto& [token, count] : kept) tokens.push_back(std::move(token));
  return Vocabulary(std::move(tokens));
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[id];
}

// ---------------------------------------------------------------------------

TokenSets::TokenSets() : stopwords_(default_stopwords().begin(), default_stopwords().end()) {}

bool TokenSets::is_stopword(std::string_view token) const { return stopwords_.contains(std::string(token)); }

bool TokenSets::is_punctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  });
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words{
      "a",       "about",   "above",   "after",  "again",   "against", "all",     "am",      "an",
      "and",     "any",     "are",     "as",     "at",      "be",      "because", "been",    "before",
      "being",   "below",   "between", "both",   "but",     "by",      "can",     "could",   "did",
      "do",      "does",    "doing",   "down",   "during",  "each",    "few",     "for",     "from",
      "further", "had",     "has",     "have",   "having",  "he",      "her",     "here",    "hers",
      "herself", "him",     "himself", "his",    "how",     "i",       "if",      "in",      "into",
      "is",      "it",      "its",     "itself", "just",    "may",     "me",      "might",   "more",
      "most",    "must",    "my",      "myself", "no",      "nor",     "not",     "now",     "of",
      "off",     "on",      "once",    "only",   "or",      "other",   "our",     "ours",    "ourselves",
      "out",     "over",    "own",     "same",   "shall",   "she",     "should",  "so",      "some",
      "such",    "than",    "that",    "the",    "their",   "theirs",  "them",    "themselves",
      "then",    "there",   "these",   "they",   "this",    "those",   "through", "to",      "too",
      "under",   "until",   "up",      "upon",   "very",    "via",     "was",     "we",      "were",
      "what",    "when",    "where",   "which",  "while",   "who",     "whom",    "why",     "will",
      "with",    "within",  "without", "would",  "you",     "your",    "yours",   "yourself",
      "yourselves"};
  return words;
}

std::unordered_set<std::string> read_word_list(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    std::string word = line.substr(begin, end - begin + 1);
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    words.insert(std::move(word));
  }
  return words;
}

}  // namespace scidraft::writer
