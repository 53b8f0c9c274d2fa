#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace scidraft::writer {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kSpecialCount = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kUnkToken = "<unk>";

// Dense token index. Ids 0-3 are the special tokens; every other string maps
// to UNK.
class Vocabulary {
 public:
  Vocabulary();
  // tokens must start with the four special tokens in id order.
  explicit Vocabulary(std::vector<std::string> tokens);

  // Keeps tokens seen at least min_count times, most frequent first, ties in
  // lexical order.
  static Vocabulary build(std::span<const std::vector<std::string>> texts, std::size_t min_count);

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Tokens exempt from repetition masking.
class TokenSets {
 public:
  TokenSets();  // built-in English stop words
  explicit TokenSets(std::unordered_set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

  bool is_stopword(std::string_view token) const;
  // Non-empty and made only of ASCII punctuation characters.
  static bool is_punctuation(std::string_view token);
  // True when a repeated occurrence of token must be masked.
  bool maskable(std::string_view token) const { return !is_stopword(token) && !is_punctuation(token); }

  const std::unordered_set<std::string>& stopwords() const noexcept { return stopwords_; }

 private:
  std::unordered_set<std::string> stopwords_;
};

const std::vector<std::string>& default_stopwords();

// One word per line; blank lines and '#' comments skipped; words lowercased.
std::unordered_set<std::string> read_word_list(std::istream& in);

}  // namespace scidraft::writer
