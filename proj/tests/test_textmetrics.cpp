#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "structeval/textmetrics.hpp"

using namespace structeval;

TEST(Chrf, BoundaryCases) {
  EXPECT_DOUBLE_EQ(chrf("", ""), 100.0);
  EXPECT_DOUBLE_EQ(chrf("abc", ""), 0.0);
  EXPECT_DOUBLE_EQ(chrf("", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(chrf("hello world", "hello world"), 100.0);
  EXPECT_DOUBLE_EQ(chrf("abc", "xyz"), 0.0);
}

TEST(Chrf, IgnoresWhitespace) { EXPECT_DOUBLE_EQ(chrf("a b c", "abc"), 100.0); }

TEST(Chrf, HandlesMultibyteCodePoints) {
  EXPECT_DOUBLE_EQ(chrf("日本語", "日本語"), 100.0);
  EXPECT_NEAR(chrf("日本", "日本語"), oracle::chrf("日本", "日本語"), 1e-12);
}

TEST(Chrf, RecallWeighted) {
  // Missing characters hurt more than extra ones with beta = 2.
  EXPECT_GT(chrf("abcdefgh", "abcd"), chrf("abcd", "abcdefgh"));
}

TEST(Chrf, ProfileOverloadAgrees) {
  CharNgramProfile h("the cat sat", 6), r("the cat sat down", 6);
  EXPECT_DOUBLE_EQ(chrf(h, r), chrf("the cat sat", "the cat sat down"));
}

TEST(Chrf, MatchesOracleOnRandomStrings) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcd ";
  for (int t = 0; t < 200; ++t) {
    std::string a, b;
    int la = static_cast<int>(rng() % 15), lb = static_cast<int>(rng() % 15);
    for (int i = 0; i < la; ++i) a += alphabet[rng() % alphabet.size()];
    for (int i = 0; i < lb; ++i) b += alphabet[rng() % alphabet.size()];
    EXPECT_NEAR(chrf(a, b), oracle::chrf(a, b), 1e-9) << '"' << a << "\" vs \"" << b << '"';
  }
}

TEST(Bleu, IdentityIsHundred) {
  std::vector<std::pair<std::string, std::string>> c{{"a b c", "a b c"}};
  EXPECT_NEAR(corpus_bleu(c), 100.0, 1e-9);
  c = {{"the quick brown fox jumps", "the quick brown fox jumps"}};
  EXPECT_NEAR(corpus_bleu(c), 100.0, 1e-9);
}

TEST(Bleu, EmptyHypothesisScoresZero) {
  std::vector<std::pair<std::string, std::string>> c{{"", "a b c"}};
  EXPECT_DOUBLE_EQ(corpus_bleu(c), 0.0);
}

TEST(Bleu, EmptyCorpusThrows) {
  std::vector<std::pair<std::string, std::string>> c;
  EXPECT_THROW(corpus_bleu(c), EmptyCorpus);
}

TEST(Bleu, BrevityPenalty) {
  std::vector<std::pair<std::string, std::string>> c{{"a b", "a b c d"}};
  EXPECT_NEAR(corpus_bleu(c), oracle::corpus_bleu(c), 1e-9);
  EXPECT_LT(corpus_bleu(c), 100.0);
}

TEST(Bleu, NoSmoothingZeroesMissingOrders) {
  BleuConfig cfg;
  cfg.smoothing = Smoothing::none;
  std::vector<std::pair<std::string, std::string>> c{{"a b c d", "a x c y"}};
  EXPECT_DOUBLE_EQ(corpus_bleu(c, cfg), 0.0);
  EXPECT_GT(corpus_bleu(c), 0.0);
}

TEST(Bleu, StatsAreAdditive) {
  auto a = bleu_stats("a b c", "a b d");
  auto b = bleu_stats("x y", "x y z");
  auto sum = a;
  sum += b;
  std::vector<std::pair<std::string, std::string>> c{{"a b c", "a b d"}, {"x y", "x y z"}};
  EXPECT_DOUBLE_EQ(bleu_from_stats(sum), corpus_bleu(c));
}

TEST(Bleu, CharacterTokenizer) {
  BleuConfig cfg;
  cfg.tokenizer = Tokenizer::character;
  auto t = tokenize("日本 語", Tokenizer::character);
  ASSERT_EQ(t.size(), 3u);
  std::vector<std::pair<std::string, std::string>> c{{"日本語", "日本語"}};
  EXPECT_NEAR(corpus_bleu(c, cfg), 100.0, 1e-9);
}

TEST(Bleu, MatchesOracleOnRandomCorpora) {
  std::mt19937_64 rng(11);
  const char* vocab[] = {"a", "b", "c", "d", "e"};
  auto sentence = [&] {
    std::string s;
    int n = static_cast<int>(rng() % 9);
    for (int i = 0; i < n; ++i) s += std::string(i ? " " : "") + vocab[rng() % 5];
    return s;
  };
  for (int t = 0; t < 100; ++t) {
    std::vector<std::pair<std::string, std::string>> c;
    int docs = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < docs; ++i) c.emplace_back(sentence(), sentence());
    EXPECT_NEAR(corpus_bleu(c), oracle::corpus_bleu(c), 1e-9);
  }
}
