// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "../oracles/brute_force.hpp"
#include "calconf/errors.hpp"
#include "calconf/quality.hpp"
#include "calconf/records.hpp"
#include "test_support.hpp"

namespace calconf {
namespace {

Tokens toks(std::initializer_list<const char*> words) { return Tokens(words.begin(), words.end()); }

TEST(Tokenize, Rules) {
  EXPECT_EQ(tokenize("The cat."), toks({"the", "cat", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("A-B"), toks({"a", "-", "b"}));
  EXPECT_EQ(tokenize("  Hello,\tWORLD!\n"), toks({"hello", ",", "world", "!"}));
}

TEST(NormalizeAnswer, DropsArticlesAndPunctuation) {
  EXPECT_EQ(normalize_answer("The Eiffel Tower!"), toks({"eiffel", "tower"}));
  EXPECT_EQ(normalize_answer("an apple, a pear"), toks({"apple", "pear"}));
  EXPECT_TRUE(normalize_answer("the.").empty());
}

TEST(Bleu, IdentityAndDisjoint) {
  const auto a = toks({"the", "quick", "brown", "fox", "jumps"});
  EXPECT_DOUBLE_EQ(sentence_bleu(a, a).value, 1.0);
  EXPECT_DOUBLE_EQ(sentence_bleu(a, toks({"x", "y", "z"})).value, 0.0);
  EXPECT_DOUBLE_EQ(sentence_bleu({}, a).value, 0.0);
  EXPECT_DOUBLE_EQ(sentence_bleu(a, {}).value, 0.0);
}

// Frozen from tests/oracles/oracle_values.py (50-digit arithmetic).
TEST(Bleu, MatchesHighPrecisionOracle) {
  EXPECT_NEAR(sentence_bleu(tokenize("the cat sat on the mat"), tokenize("the cat is on the mat")).value,
              0.48549177170732342028, 1e-14);
  EXPECT_NEAR(sentence_bleu(toks({"a", "b", "c"}), toks({"a", "b", "d", "e"})).value, 0.49196255036686594982,
              1e-14);
}

TEST(RougeL, Examples) {
  EXPECT_DOUBLE_EQ(rouge_l(toks({"the", "cat"}), toks({"the", "cat", "sat"})).value, 0.8);
  EXPECT_DOUBLE_EQ(rouge_l(toks({"a", "b"}), toks({"a", "b"})).value, 1.0);
  EXPECT_DOUBLE_EQ(rouge_l(toks({"a", "b"}), toks({"c", "d"})).value, 0.0);
}

TEST(RougeL, SymmetricUnderSwap) {
  const auto a = toks({"a", "b", "c", "d", "e"});
  const auto b = toks({"b", "x", "d", "e"});
  EXPECT_DOUBLE_EQ(rouge_l(a, b).value, rouge_l(b, a).value);
}

TEST(TokenF1, Examples) {
  EXPECT_DOUBLE_EQ(token_f1(toks({"a", "b"}), toks({"b", "c"})).value, 0.5);
  EXPECT_DOUBLE_EQ(token_f1(toks({"paris"}), toks({"paris"})).value, 1.0);
  EXPECT_DOUBLE_EQ(token_f1(toks({"x"}), toks({"y"})).value, 0.0);
  EXPECT_DOUBLE_EQ(token_f1({}, {}).value, 1.0);
  EXPECT_DOUBLE_EQ(token_f1({}, toks({"y"})).value, 0.0);
}

TEST(TokenF1, QaNormalizationAtTextLevel) {
  EXPECT_DOUBLE_EQ(score_text(QualityMetric::kF1, "The Eiffel Tower.", "eiffel tower").value, 1.0);
}

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  static const char* kVocab[] = {"a", "b", "c", "d", "e", "f"};
  Tokens out(rng() % (max_len + 1));
  for (auto& t : out) t = kVocab[rng() % 6];
  return out;
}

TEST(QualityOracles, RandomPairsAgreeExactly) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const Tokens cand = random_tokens(rng, 14);
    const Tokens ref = random_tokens(rng, 14);
    EXPECT_EQ(sentence_bleu(cand, ref).value, oracle::bleu(cand, ref)) << trial;
    EXPECT_EQ(rouge_l(cand, ref).value, oracle::rouge_l(cand, ref)) << trial;
    EXPECT_EQ(token_f1(cand, ref).value, oracle::token_f1(cand, ref)) << trial;
  }
}

TEST(Porter, ClassicExamples) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},      {"ties", "ti"},          {"caress", "caress"},
      {"cats", "cat"},        {"feed", "feed"},        {"agreed", "agre"},      {"plastered", "plaster"},
      {"bled", "bled"},       {"motoring", "motor"},   {"sing", "sing"},        {"conflated", "conflat"},
      {"troubled", "troubl"}, {"sized", "size"},       {"hopping", "hop"},      {"tanned", "tan"},
      {"falling", "fall"},    {"hissing", "hiss"},     {"fizzed", "fizz"},      {"failing", "fail"},
      {"filing", "file"},     {"happy", "happi"},      {"sky", "sky"},          {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"}, {"digitizer", "digit"}, {"triplicate", "triplic"},
      {"formative", "form"},  {"formalize", "formal"}, {"electrical", "electr"}, {"hopeful", "hope"},
      {"goodness", "good"},   {"revival", "reviv"},    {"allowance", "allow"},  {"inference", "infer"},
      {"airliner", "airlin"}, {"adjustable", "adjust"}, {"defensible", "defens"}, {"irritant", "irrit"},
      {"replacement", "replac"}, {"adjustment", "adjust"}, {"dependent", "depend"}, {"adoption", "adopt"},
      {"communism", "commun"}, {"activate", "activ"},  {"homologous", "homolog"}, {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"}, {"rate", "rate"},       {"cease", "ceas"},
      {"controlling", "control"}, {"roll", "roll"},   {"generalizations", "gener"}, {"oscillators", "oscil"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(Meteor, IdentityClosedForm) {
  for (std::size_t m = 1; m <= 6; ++m) {
    Tokens a;
    for (std::size_t i = 0; i < m; ++i) a.push_back("w" + std::to_string(i));
    const double md = static_cast<double>(m);
    EXPECT_NEAR(meteor(a, a).value, 1.0 - 0.5 / (md * md * md), 1e-15) << m;
  }
}

TEST(Meteor, DisjointIsZero) { EXPECT_DOUBLE_EQ(meteor(toks({"a", "b"}), toks({"c", "d"})).value, 0.0); }

TEST(Meteor, StemStageMatchesPlural) {
  EXPECT_GT(meteor(toks({"cats"}), toks({"cat"})).value, 0.0);
  EXPECT_DOUBLE_EQ(meteor(toks({"cats"}), toks({"cat"})).value, meteor(toks({"cat"}), toks({"cat"})).value);
}

TEST(Meteor, ChunkPenalty) {
  // "the cat" and "sat" form two chunks over three matches.
  const double expected = 1.0 - 0.5 * (2.0 / 3.0) * (2.0 / 3.0) * (2.0 / 3.0);
  EXPECT_NEAR(meteor(toks({"the", "cat", "sat"}), toks({"sat", "the", "cat"})).value, expected, 1e-15);
}

TEST(Meteor, FMeanWeighsRecall) {
  // P = 1, R = 1/2: F = 10 * 0.5 / (0.5 + 9) ; one chunk of 1 match
  const double f = 10.0 * 0.5 / (0.5 + 9.0);
  EXPECT_NEAR(meteor(toks({"a"}), toks({"a", "b"})).value, f * (1.0 - 0.5), 1e-15);
}

TEST(QualityOfRecord, TopBeamEqualsReference) {
  auto record = testing::make_record({-1.0, -2.0});
  record.beams[0].text = "the cat sat on the mat";
  record.references = {"the cat sat on the mat"};
  for (auto metric : {QualityMetric::kBleu, QualityMetric::kRougeL, QualityMetric::kF1}) {
    EXPECT_DOUBLE_EQ(quality_of_record(record, metric).value, 1.0);
  }
}

TEST(QualityOfRecord, MaxOverReferences) {
  auto record = testing::make_record({-1.0});
  record.beams[0].text = "a b c d e f g h i j";
  record.references = {"a b c", "a b c d e f g"};
  const double first = score_text(QualityMetric::kRougeL, record.beams[0].text, "a b c").value;
  const double second = score_text(QualityMetric::kRougeL, record.beams[0].text, "a b c d e f g").value;
  ASSERT_LT(first, second);
  EXPECT_DOUBLE_EQ(quality_of_record(record, QualityMetric::kRougeL).value, second);
}

TEST(QualityOfRecord, UnknownMetricId) {
  const auto record = testing::make_record({-1.0});
  EXPECT_THROW(quality_of_record(record, "bleu2"), UsageError);
  EXPECT_NO_THROW(quality_of_record(record, "meteor"));
}

TEST(QualityMetrics, Bounded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Tokens a = random_tokens(rng, 10);
    const Tokens b = random_tokens(rng, 10);
    for (double v : {sentence_bleu(a, b).value, rouge_l(a, b).value, token_f1(a, b).value, meteor(a, b).value}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

}  // namespace
}  // namespace calconf
