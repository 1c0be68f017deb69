// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "keys/metrics.hpp"
#include "keys/text.hpp"
#include "oracles.hpp"

namespace keys {
namespace {

using Words = std::vector<std::string>;

Words w(std::string_view s) { return word_tokens(s); }

TEST(RougeN, Fixtures) {
  const auto same = rouge_n(w("a b c"), w("a b c"), 1);
  EXPECT_EQ(same.f1, 1.0);
  const auto r1 = rouge_n(w("the cat sat"), w("the cat ran"), 1);
  EXPECT_NEAR(r1.precision, 2.0 / 3, 1e-12);
  EXPECT_NEAR(r1.recall, 2.0 / 3, 1e-12);
  EXPECT_NEAR(r1.f1, 2.0 / 3, 1e-12);
  EXPECT_NEAR(rouge_n(w("the cat sat"), w("the cat ran"), 2).f1, 0.5, 1e-12);
  const auto none = rouge_n(w("x y"), w("a b"), 1);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(rouge_n({}, w("a"), 1).f1, 0.0);
}

TEST(RougeL, Fixtures) {
  EXPECT_EQ(lcs_length(w("a b c d"), w("a c b d")), 3u);
  const auto r = rouge_l(w("a b c d"), w("a c b d"));
  EXPECT_NEAR(r.precision, 0.75, 1e-12);
  EXPECT_NEAR(r.recall, 0.75, 1e-12);
  EXPECT_EQ(rouge_l(w("a b"), w("a b")).f1, 1.0);
  EXPECT_EQ(rouge_l({}, w("a b")).f1, 0.0);
}

TEST(RougeLSum, SingleSentenceEqualsRougeL) {
  const auto a = rouge_lsum("a b c d", "a c b d");
  const auto b = rouge_l(w("a b c d"), w("a c b d"));
  EXPECT_DOUBLE_EQ(a.precision, b.precision);
  EXPECT_DOUBLE_EQ(a.recall, b.recall);
}

TEST(RougeLSum, UnionAcrossSentences) {
  // "a b c": LCS with "a c" is {a, c}, with "b e d" is {b}; the union covers
  // all three words. "d e" shares one word with "b e d". 4 hits out of 5.
  const auto r = rouge_lsum("a c\nb e d", "a b c\nd e");
  EXPECT_NEAR(r.precision, 0.8, 1e-12);
  EXPECT_NEAR(r.recall, 0.8, 1e-12);
  EXPECT_NEAR(rouge_l(w("a c b e d"), w("a b c d e")).f1, 0.6, 1e-12);
  EXPECT_EQ(rouge_lsum("a b", "").f1, 0.0);
}

TEST(Bleu, Fixtures) {
  EXPECT_NEAR(bleu(w("the cat sat on the mat"), {w("the cat sat on the mat")}).bleu, 1.0, 1e-12);
  EXPECT_NEAR(bleu(w("the the the the"), {w("the cat")}).precisions[0], 0.25, 1e-12);
  const auto short_cand = bleu(w("the cat"), {w("the cat sat on the mat")});
  EXPECT_NEAR(short_cand.brevity_penalty, std::exp(1.0 - 6.0 / 2.0), 1e-15);
  EXPECT_NEAR(bleu(w("the cat sat on a mat today"), {w("the cat sat on the mat")}).bleu, 0.4347208719449914, 1e-9);
  EXPECT_EQ(bleu({}, {w("a b")}).bleu, 0.0);
}

TEST(ScoreAnswer, Json) {
  const auto j = to_json(score_answer("The capital is Berlin.", "The capital of Germany is Berlin."));
  for (const char* key : {"rouge1", "rouge2", "rougeL", "rougeLsum", "bleu"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_NEAR(j["rouge1"]["recall"].get<double>(), 4.0 / 6, 1e-12);
}

Words random_words(std::mt19937_64& rng) {
  static const char* vocab[] = {"a", "b", "c", "d", "e"};
  Words out(rng() % 11);
  for (auto& x : out) x = vocab[rng() % 5];
  return out;
}

TEST(MetricsOracle, RandomPairs) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cand = random_words(rng);
    const auto ref = random_words(rng);
    EXPECT_NEAR(rouge_n(cand, ref, 1).f1, oracle::rouge_n_f1(cand, ref, 1), 1e-12);
    EXPECT_NEAR(rouge_n(cand, ref, 2).f1, oracle::rouge_n_f1(cand, ref, 2), 1e-12);
    EXPECT_EQ(lcs_length(cand, ref), oracle::lcs(cand, ref));
    EXPECT_NEAR(rouge_l(cand, ref).f1, oracle::rouge_l_f1(cand, ref), 1e-12);
    EXPECT_NEAR(bleu(cand, {ref}).bleu, oracle::bleu(cand, ref), 1e-12);
  }
}

}  // namespace
}  // namespace keys
