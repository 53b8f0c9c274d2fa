#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scidraft/eval/metrics.hpp"
#include "scidraft/eval/writer_provider.hpp"
#include "scidraft/numerics/random.hpp"
#include "scidraft/writer/corpus.hpp"
#include "scidraft/writer/decoder.hpp"
#include "scidraft/writer/train.hpp"
#include "support/oracles.hpp"

using namespace scidraft;
using namespace scidraft::eval;
using numerics::Rng;

namespace {

std::vector<std::string> words(const std::string& text) { return writer::split_words(text); }

class FixedProvider : public TokenDistributionProvider {
 public:
  explicit FixedProvider(std::vector<std::vector<double>> probs) : probs_(std::move(probs)) {}
  std::size_t sequence_count() const override { return probs_.size(); }
  std::vector<long double> gold_log_probabilities(std::size_t s) const override {
    std::vector<long double> out;
    for (double p : probs_[s]) out.push_back(std::log(static_cast<long double>(p)));
    return out;
  }

 private:
  std::vector<std::vector<double>> probs_;
};

class UniformProvider : public TokenDistributionProvider {
 public:
  UniformProvider(std::size_t v, std::size_t sequences, std::size_t length) : v_(v), n_(sequences), len_(length) {}
  std::size_t sequence_count() const override { return n_; }
  std::vector<long double> gold_log_probabilities(std::size_t) const override {
    return std::vector<long double>(len_, -std::log(static_cast<long double>(v_)));
  }

 private:
  std::size_t v_, n_, len_;
};

std::vector<std::string> random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  std::vector<std::string> out;
  for (std::size_t i = 0, n = rng.index(max_len + 1); i < n; ++i) out.push_back(std::string(1, char('a' + rng.index(alphabet))));
  return out;
}

}  // namespace

TEST_CASE("perplexity of simple models") {
  SUBCASE("uniform models give the vocabulary size exactly") {
    for (std::size_t v : {2u, 7u, 13u, 1000u, 50000u}) {
      CHECK(perplexity(UniformProvider(v, 37, 29)) == static_cast<double>(v));
    }
  }
  SUBCASE("a perfect model gives one") {
    CHECK(perplexity(FixedProvider({{1.0, 1.0}, {1.0}})) == 1.0);
  }
  SUBCASE("three tokens against a hand sum") {
    // -(ln 1/2 + ln 1/4 + ln 1/8) / 3 = 2 ln 2
    CHECK(perplexity(FixedProvider({{0.5, 0.25}, {0.125}})) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("a zero-probability gold token is infinite") {
    CHECK(std::isinf(perplexity(FixedProvider({{0.5, 0.0, 0.5}}))));
  }
  SUBCASE("an empty corpus is rejected") {
    CHECK_THROWS_AS(perplexity(FixedProvider({})), std::invalid_argument);
    CHECK_THROWS_AS(perplexity(FixedProvider(std::vector<std::vector<double>>(1))), std::invalid_argument);
  }
  SUBCASE("order does not matter and better gold probabilities never hurt") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::vector<double>> probs(1 + rng.index(5));
      for (auto& s : probs)
        for (std::size_t i = 0, n = 1 + rng.index(6); i < n; ++i) s.push_back(rng.uniform(0.01, 1.0));
      const double base = perplexity(FixedProvider(probs));
      CHECK(base >= 1.0);
      auto shuffled = probs;
      rng.shuffle(shuffled);
      CHECK(perplexity(FixedProvider(shuffled)) == doctest::Approx(base).epsilon(1e-12));
      auto raised = probs;
      for (auto& s : raised)
        for (double& p : s) p = std::min(1.0, p * rng.uniform(1.0, 2.0));
      CHECK(perplexity(FixedProvider(raised)) <= base * (1 + 1e-12));
    }
  }
}

TEST_CASE("writer provider agrees with the trainer's perplexity") {
  Rng rng(3);
  const std::vector<writer::WriterExample> corpus{
      {words("zinc binds"), words("zinc binds the protein"), {{0, {"zinc"}}}},
      {words("cells of protein"), words("the cells"), {}},
  };
  writer::WriterConfig config;
  config.embedding = 4;
  config.hidden = 6;
  const writer::WriterModel m =
      writer::create_writer_model(config, "t", writer::build_writer_vocab(corpus, 1), 2, rng, 0.3);
  const WriterProvider provider(m, corpus);
  CHECK(provider.sequence_count() == 2);
  CHECK(provider.gold_log_probabilities(0).size() == 5);
  CHECK(perplexity(provider) == doctest::Approx(writer::corpus_perplexity(m, corpus)).epsilon(1e-12));
}

TEST_CASE("n-gram overlap with the human input") {
  const auto a = words("the zinc finger binds dna");
  for (std::size_t n = 1; n <= 4; ++n) {
    CHECK(ngram_overlap(a, a, n).percentage == 100.0);
    CHECK_FALSE(ngram_overlap(a, a, n).input_too_short);
  }
  CHECK(ngram_overlap(a, words("p q r s t"), 1).percentage == 0.0);
  CHECK(ngram_overlap(words("a b c"), words("x a b"), 2).percentage == 50.0);
  // Repeated input bigrams count once.
  CHECK(ngram_overlap(words("a b a b"), words("a b"), 2).percentage == doctest::Approx(100.0 / 2.0));
  const Overlap short_input = ngram_overlap(words("a b"), words("a b c"), 3);
  CHECK(short_input.input_too_short);
  CHECK(short_input.percentage == 0.0);
  CHECK_THROWS_AS(ngram_overlap(a, a, 0), std::invalid_argument);

  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_tokens(rng, 12, 4);
    const auto out = random_tokens(rng, 12, 4);
    for (std::size_t n = 1; n <= 5; ++n) {
      const Overlap o = ngram_overlap(in, out, n);
      CHECK(o.input_too_short == (in.size() < n));
      CHECK(o.percentage == testing::brute_overlap(in, out, n));
    }
  }
}

TEST_CASE("sentence splitting and repetition rate") {
  CHECK(split_sentences("One. Two! Three? four") == std::vector<std::string>{"One.", " Two!", " Three?", " four"});
  CHECK(split_sentences("dose of 3.5 mg. done.") == std::vector<std::string>{"dose of 3.5 mg.", " done."});
  CHECK(split_sentences("").empty());

  const std::unordered_set<std::string> lexicon{"snail", "zinc"};
  CHECK(repetition_rate("cells divide. proteins fold.", lexicon) == 0.0);
  CHECK(repetition_rate("snail inhibits snail.", lexicon) == 1.0);
  CHECK(repetition_rate("Snail binds (snail) twice. zinc once.", lexicon) == 0.5);
  CHECK(repetition_rate("", lexicon) == 0.0);
  CHECK_THROWS_AS(repetition_rate("x.", {}), std::invalid_argument);

  std::string planted;
  for (int i = 0; i < 10; ++i) planted += (i % 3 == 1 && i < 9) ? "zinc binds zinc here. " : "zinc binds snail here. ";
  CHECK(repetition_rate(planted, lexicon) == doctest::Approx(0.3));
}

TEST_CASE("BLEU and ROUGE-L") {
  const auto ref = words("the zinc finger binds dna");
  SUBCASE("exact match scores one") {
    const BleuRouge s = bleu_rouge(ref, ref);
    for (double b : s.bleu) CHECK(b == doctest::Approx(1.0));
    CHECK(s.rouge_l == 1.0);
  }
  SUBCASE("disjoint tokens score zero") {
    const BleuRouge s = bleu_rouge(words("p q r s t"), ref);
    for (double b : s.bleu) CHECK(b == 0.0);
    CHECK(s.rouge_l == 0.0);
  }
  SUBCASE("swapped tail against hand counts") {
    const BleuRouge s = bleu_rouge(words("a b c d"), words("a b d c"));
    // Precisions: 4/4, 1/3, (0+1)/(2+1), (0+1)/(1+1); lengths equal.
    CHECK(s.bleu[0] == doctest::Approx(1.0));
    CHECK(s.bleu[1] == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK(s.bleu[2] == doctest::Approx(std::cbrt(1.0 / 9.0)));
    CHECK(s.bleu[3] == doctest::Approx(std::pow(1.0 / 18.0, 0.25)));
    CHECK(s.rouge_l == doctest::Approx(0.75));
  }
  SUBCASE("short candidates pay the brevity penalty") {
    const BleuRouge s = bleu_rouge(words("a b"), words("a b c d"));
    CHECK(s.bleu[0] == doctest::Approx(std::exp(-1.0)));
    CHECK(s.rouge_l == doctest::Approx(2.0 * 1.0 * 0.5 / 1.5));
  }
  SUBCASE("empty inputs") {
    const BleuRouge s = bleu_rouge({}, ref);
    CHECK(s.bleu == std::vector<double>(4, 0.0));
    CHECK(s.rouge_l == 0.0);
    CHECK_THROWS_AS(bleu_rouge(ref, {}), std::invalid_argument);
    CHECK_THROWS_AS(bleu_rouge(ref, ref, 0), std::invalid_argument);
  }
  SUBCASE("scores stay in range and reach one only on exact match") {
    // Up to four tokens the top-order n-gram is the whole sequence, so a
    // perfect BLEU-4 forces equality. Lower orders cannot tell permutations apart.
    Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
      const auto c = random_tokens(rng, 4, 3);
      auto r = random_tokens(rng, 4, 3);
      if (r.empty()) r.push_back("a");
      const BleuRouge s = bleu_rouge(c, r);
      for (double b : s.bleu) {
        CHECK(b >= 0.0);
        CHECK(b <= 1.0 + 1e-12);
      }
      CHECK((s.bleu.back() >= 1.0 - 1e-12) == (c == r));
      CHECK(s.rouge_l >= 0.0);
      CHECK(s.rouge_l <= 1.0);
      CHECK((s.rouge_l == 1.0) == (c == r));
    }
  }
}

TEST_CASE("beam outputs never repeat a related entity token") {
  const writer::TokenSets sets;
  writer::WriterConfig config;
  config.embedding = 4;
  config.hidden = 6;
  const std::vector<std::string> pool{"zinc", "finger", "binds", "the", "of", "dna", "cd14", "molecule"};
  writer::Vocabulary vocab({"<pad>", "<s>", "</s>", "<unk>", "zinc", "finger", "binds", "the", "of", "dna"});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const writer::WriterModel m = writer::create_writer_model(config, "t", vocab, 3, rng, 2.0);
    const std::vector<writer::EntityMemory> ents{{0, {"zinc", "finger"}}, {2, {"cd14", "molecule"}}};
    writer::BeamOptions options;
    options.max_len = 12;
    const writer::Generation g = writer::beam_search(m, words("zinc binds dna"), ents, sets, options);
    std::unordered_set<std::string> lexicon;
    for (const auto& e : ents)
      for (const auto& t : e.tokens)
        if (!sets.is_stopword(t)) lexicon.insert(t);
    std::string text;
    for (const auto& t : g.tokens) text += t + " ";
    CHECK(repetition_rate(text, lexicon) == 0.0);
  }
}

TEST_CASE("metric reports serialise to JSON") {
  MetricReport r{"perplexity", {{"value", 3.5}, {"other", std::numeric_limits<double>::infinity()}}, {"dev.jsonl"}, {{"n", 2}}};
  const auto j = to_json(r);
  CHECK(j["metric"] == "perplexity");
  CHECK(j["values"]["value"] == 3.5);
  CHECK(j["values"]["other"] == "inf");
  CHECK(j["corpora"][0] == "dev.jsonl");
  CHECK(j["parameters"]["n"] == 2);
}
