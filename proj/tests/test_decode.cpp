// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "keys/decode.hpp"
#include "keys/error.hpp"

namespace keys {
namespace {

using testing::HashLM;
using testing::make_vocab;
using testing::TableLM;

constexpr TokenId kEos = Vocabulary::kEos;

// Words sort as canberra=4, perth=5, sydney=6, the=7.
struct CapitalFixture {
  Vocabulary vocab = make_vocab({"sydney", "canberra", "perth", "the"});
  KeywordTrie trie = build_trie(build_table({{"canberra", 10}, {"sydney", 3}, {"perth", 2}}), vocab);
  NextTokenDistribution dist{{0, 0, 0, 0, 0.3, 0.2, 0.4, 0.1}};
  TokenId canberra = 4, perth = 5, sydney = 6, the = 7;
};

// new=4, the=5, york=6; a match on "new" is already active.
struct NewYorkFixture {
  Vocabulary vocab = make_vocab({"new", "york", "the"});
  KeywordTrie trie = build_trie(build_table({{"new york", 1}}), vocab);
  TokenId new_id = 4, the = 5, york = 6;
  MatchState after_new() const { return advance_matches({}, new_id, trie); }
};

double linf(const NextTokenDistribution& a, const NextTokenDistribution& b) {
  double d = 0.0;
  for (TokenId i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

TEST(KeysBoost, LambdaZeroIsIdentity) {
  CapitalFixture f;
  EXPECT_LE(linf(keys_boost(f.dist, {}, f.trie, 0.0, 1.0), f.dist), 1e-12);
  EXPECT_LE(linf(keys_boost(f.dist, {}, KeywordTrie{}, 5.0, 1.0), f.dist), 1e-12);
}

TEST(KeysBoost, CapitalReweighting) {
  CapitalFixture f;
  const auto out = keys_boost(f.dist, {}, f.trie, 5.0, 0.0);
  EXPECT_NEAR(out[f.sydney], 10.0 / 33, 1e-12);
  EXPECT_NEAR(out[f.canberra], 18.0 / 33, 1e-12);
  EXPECT_NEAR(out[f.perth], 4.0 / 33, 1e-12);
  EXPECT_NEAR(out[f.the], 1.0 / 33, 1e-12);
  EXPECT_EQ(argmax(f.dist), f.sydney);
  EXPECT_EQ(argmax(out), f.canberra);
}

TEST(KeysBoost, LiteralFormMultipliesByAlpha) {
  CapitalFixture f;
  const auto out = keys_boost(f.dist, {}, f.trie, 1.0, 0.0, BoostForm::literal);
  // 0.3*1, 0.2*0.2, 0.4*0.3, 0.1 unchanged.
  const double z = 0.3 + 0.04 + 0.12 + 0.1;
  EXPECT_NEAR(out[f.canberra], 0.3 / z, 1e-12);
  EXPECT_NEAR(out[f.the], 0.1 / z, 1e-12);
}

TEST(KeysBoost, ContinuationBeatsFreshStart) {
  NewYorkFixture f;
  const auto state = f.after_new();
  const auto bonus = keyword_bonus(f.vocab.size(), state, f.trie, 1.0);
  EXPECT_EQ(bonus[f.york], 2.0);  // multiplier 3 at lambda=1
  EXPECT_EQ(bonus[f.new_id], 1.0);  // multiplier 2
  EXPECT_EQ(bonus[f.the], 0.0);
  EXPECT_GT(1.0 + bonus[f.york], 1.0 + bonus[f.new_id]);
}

TEST(KeysBoost, OverlapWeightIsMonotone) {
  NewYorkFixture f;
  const NextTokenDistribution dist({0, 0.1, 0, 0, 0.3, 0.3, 0.3});
  double previous = 0.0;
  for (double mu : {0.0, 0.5, 1.0, 2.0}) {
    const double p = keys_boost(dist, f.after_new(), f.trie, 1.0, mu)[f.york];
    EXPECT_GT(p, previous) << mu;
    previous = p;
  }
}

TEST(AdvanceMatches, Walks) {
  NewYorkFixture f;
  const auto s1 = f.after_new();
  ASSERT_EQ(s1.active.size(), 1u);
  EXPECT_EQ(s1.active[0].depth, 1u);
  EXPECT_TRUE(advance_matches(s1, f.york, f.trie).empty());

  const auto vocab = make_vocab({"new", "york", "zealand", "paris"});
  const auto trie = build_trie(build_table({{"new york", 1}, {"new zealand", 1}}), vocab);
  const auto s = advance_matches({}, *vocab.find("new"), trie);
  EXPECT_EQ(s.depths(), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(advance_matches(s, *vocab.find("paris"), trie).empty());
}

TEST(AdvanceMatches, OverlappingStarts) {
  // "a a b": after "a a" one match continues at depth 2 and another restarts.
  const auto vocab = make_vocab({"a", "b"});
  const auto trie = build_trie(build_table({{"a a b", 1}}), vocab);
  const TokenId a = *vocab.find("a");
  const auto s = advance_matches(advance_matches({}, a, trie), a, trie);
  EXPECT_EQ(s.depths(), (std::vector<std::size_t>{2, 1}));
}

TEST(Strategies, GreedyAndTopOne) {
  const NextTokenDistribution d({0.1, 0.7, 0.2});
  Rng rng(1);
  EXPECT_EQ(apply_strategy(d, Greedy{}, rng), 1u);
  const NextTokenDistribution tie({0.4, 0.2, 0.4});
  EXPECT_EQ(apply_strategy(tie, Greedy{}, rng), 0u);
  EXPECT_EQ(apply_strategy(tie, TopK{1}, rng), 0u);
  EXPECT_THROW(apply_strategy(d, Beam{2}, rng), ConfigError);
}

TEST(Strategies, TopPCandidates) {
  const NextTokenDistribution d({0.5, 0.4, 0.1});
  EXPECT_EQ(candidate_set(d, TopP{0.9}), (std::vector<TokenId>{0, 1}));
  EXPECT_EQ(candidate_set(d, TopP{0.5}), (std::vector<TokenId>{0}));
  EXPECT_EQ(candidate_set(d, TopK{2}), (std::vector<TokenId>{0, 1}));
}

std::vector<double> empirical(const NextTokenDistribution& d, const Strategy& s, int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> freq(d.size(), 0.0);
  for (int i = 0; i < draws; ++i) freq[apply_strategy(d, s, rng)] += 1.0 / draws;
  return freq;
}

TEST(Strategies, TopPSampleFrequencies) {
  const auto f = empirical(NextTokenDistribution({0.5, 0.4, 0.1}), TopP{0.9}, 100000, 5);
  EXPECT_NEAR(f[0], 5.0 / 9, 0.01);
  EXPECT_NEAR(f[1], 4.0 / 9, 0.01);
  EXPECT_EQ(f[2], 0.0);
}

TEST(Strategies, TemperatureSampleFrequencies) {
  const auto f = empirical(NextTokenDistribution({0.5, 0.3, 0.2}), Temperature{0.5}, 100000, 6);
  EXPECT_NEAR(f[0], 0.25 / 0.38, 0.01);
  EXPECT_NEAR(f[1], 0.09 / 0.38, 0.01);
  EXPECT_NEAR(f[2], 0.04 / 0.38, 0.01);
}

TEST(Strategies, MaskForStep) {
  NextTokenDistribution d({0.1, 0.2, 0.1, 0.1, 0.5});
  mask_for_step(d, 0, 1);
  EXPECT_EQ(d[0], 0.0);
  EXPECT_EQ(d[kEos], 0.0);
  EXPECT_DOUBLE_EQ(d[4], 1.0);
  NextTokenDistribution e({0, 0.5, 0, 0, 0.5});
  mask_for_step(e, 1, 1);
  EXPECT_EQ(e[kEos], 0.5);
}

TEST(DecoderConfig, ValidationAndJson) {
  DecoderConfig c;
  c.strategy = TopP{0.9};
  c.lambda = 2;
  c.mu = 0.5;
  c.boost_form = BoostForm::literal;
  c.min_len = 2;
  c.max_len = 9;
  c.seed = 44;
  EXPECT_EQ(decoder_config_from_json(decoder_config_to_json(c)), c);
  for (auto bad : {nlohmann::json{{"strategy", "topp"}, {"p", 1.5}}, nlohmann::json{{"strategy", "nope"}},
                   nlohmann::json{{"lambda", -1}}, nlohmann::json{{"min_len", 5}, {"max_len", 2}},
                   nlohmann::json{{"strategy", "temperature"}, {"tau", 0}}}) {
    EXPECT_THROW(decoder_config_from_json(bad).validate(), ConfigError) << bad.dump();
  }
}

DecoderConfig config(Strategy s, double lambda = 0.0, double mu = 0.0, std::uint64_t seed = 0) {
  DecoderConfig c;
  c.strategy = s;
  c.lambda = lambda;
  c.mu = mu;
  c.seed = seed;
  c.max_len = 12;
  return c;
}

const std::vector<Strategy>& all_sampling() {
  static const std::vector<Strategy> s{Greedy{}, Temperature{0.7}, TopK{3}, TopP{0.8}, Beam{3}};
  return s;
}

TEST(Generate, CapitalFlipThreshold) {
  CapitalFixture f;
  TableLM lm(f.vocab, {0, 1, 0, 0, 0, 0, 0, 0});
  lm.set({}, {f.dist.probs().begin(), f.dist.probs().end()});
  EXPECT_EQ(generate(lm, f.trie, {}, config(Greedy{}, 0.5)).tokens.front(), f.sydney);
  EXPECT_EQ(generate(lm, f.trie, {}, config(Greedy{}, 0.6)).tokens.front(), f.canberra);
}

TEST(Generate, ReducesToBaseline) {
  const auto vocab = make_vocab({"a", "b", "c", "d"});
  const auto trie = build_trie(build_table({{"a b", 3}, {"c", 1}}), vocab);
  for (std::uint64_t salt = 0; salt < 20; ++salt) {
    HashLM lm(vocab, salt);
    for (const auto& s : all_sampling()) {
      const auto vanilla = generate(lm, KeywordTrie{}, {}, config(s, 0.0, 0.0, salt));
      const auto no_lambda = generate(lm, trie, {}, config(s, 0.0, 1.0, salt));
      const auto no_table = generate(lm, KeywordTrie{}, {}, config(s, 5.0, 1.0, salt));
      EXPECT_EQ(no_lambda.tokens, vanilla.tokens);
      EXPECT_EQ(no_table.tokens, vanilla.tokens);
      EXPECT_EQ(no_lambda.total_logprob, vanilla.total_logprob);
    }
  }
}

TEST(Generate, Deterministic) {
  const auto vocab = make_vocab({"a", "b", "c", "d"});
  const auto trie = build_trie(build_table({{"a b", 3}, {"c", 1}}), vocab);
  HashLM lm(vocab, 9);
  for (const auto& s : all_sampling()) {
    auto c = config(s, 3.0, 1.0, 77);
    c.trace = true;
    const auto x = generate(lm, trie, {}, c);
    const auto y = generate(lm, trie, {}, c);
    EXPECT_EQ(x.tokens, y.tokens);
    EXPECT_EQ(x.total_logprob, y.total_logprob);
    EXPECT_EQ(trace_to_json(x.trace, vocab), trace_to_json(y.trace, vocab));
  }
}

TEST(Generate, MinLengthSuppressesEos) {
  const auto vocab = make_vocab({"a"});
  TableLM lm(vocab, {0, 0.9, 0, 0, 0.1});
  auto c = config(Greedy{});
  EXPECT_TRUE(generate(lm, KeywordTrie{}, {}, c).tokens.empty());
  c.min_len = 3;
  EXPECT_EQ(generate(lm, KeywordTrie{}, {}, c).tokens.size(), 3u);
  c.max_len = 2;
  EXPECT_THROW(generate(lm, KeywordTrie{}, {}, c), ConfigError);
}

TEST(Generate, TraceRecordsBoost) {
  CapitalFixture f;
  TableLM lm(f.vocab, {0, 1, 0, 0, 0, 0, 0, 0});
  lm.set({}, {f.dist.probs().begin(), f.dist.probs().end()});
  auto c = config(Greedy{}, 5.0);
  c.trace = true;
  const auto out = generate(lm, f.trie, {}, c);
  ASSERT_EQ(out.trace.size(), 2u);
  EXPECT_EQ(out.trace[0].pre_boost.front().token, f.sydney);
  EXPECT_EQ(out.trace[0].post_boost.front().token, f.canberra);
  EXPECT_EQ(out.trace[1].chosen, kEos);
  EXPECT_NEAR(out.total_logprob, std::log(18.0 / 33), 1e-12);
}

TEST(Beam, WidthOneIsGreedy) {
  const auto vocab = make_vocab({"a", "b", "c", "d"});
  const auto trie = build_trie(build_table({{"a b", 3}, {"c", 1}}), vocab);
  for (std::uint64_t salt = 0; salt < 50; ++salt) {
    HashLM lm(vocab, salt);
    const auto g = generate(lm, trie, {}, config(Greedy{}, 2.0, 1.0));
    const auto b = generate(lm, trie, {}, config(Beam{1}, 2.0, 1.0));
    EXPECT_EQ(b.tokens, g.tokens);
    EXPECT_NEAR(b.total_logprob, g.total_logprob, 1e-12);
  }
}

TEST(Beam, HandTracedTwoBeam) {
  const auto vocab = make_vocab({"a", "b"});
  const TokenId a = 4, b = 5;
  TableLM lm(vocab, {0, 0.8, 0, 0, 0.1, 0.1});
  lm.set({}, {0, 0.1, 0, 0, 0.5, 0.4});
  lm.set({a}, {0, 0.4, 0, 0, 0.3, 0.3});
  lm.set({b}, {0, 0.05, 0, 0, 0.9, 0.05});
  auto c = config(Beam{2});
  c.max_len = 3;
  // step 0 keeps a(.5), b(.4); step 1 keeps b a(.36) and finishes a(.2);
  // step 2 finishes b a (.288), which beats every live hypothesis.
  const auto out = generate(lm, KeywordTrie{}, {}, c);
  EXPECT_EQ(out.tokens, (std::vector<TokenId>{b, a}));
  EXPECT_NEAR(out.total_logprob, std::log(0.288), 1e-12);
  EXPECT_EQ(generate(lm, KeywordTrie{}, {}, config(Greedy{})).tokens, (std::vector<TokenId>{a}));
}

TEST(Beam, MatchesExhaustiveSearchOverWords) {
  // Three words, EOS held back until the end: 27 sequences of length 3.
  const auto vocab = make_vocab({"a", "b", "c"});
  const auto trie = build_trie(build_table({{"a b", 2}, {"c", 1}}), vocab);
  for (std::uint64_t salt = 0; salt < 100; ++salt) {
    HashLM lm(vocab, salt);
    auto c = config(Beam{27}, 1.0 + static_cast<double>(salt % 4), 0.5 * static_cast<double>(salt % 3));
    c.max_len = c.min_len = 3;
    const auto expected = oracle::exhaustive_best(lm, trie, c);
    const auto got = generate(lm, trie, {}, c);
    EXPECT_EQ(got.tokens, expected.second) << salt;
    EXPECT_NEAR(got.total_logprob, expected.first, 1e-12);
  }
}

TEST(Beam, MatchesExhaustiveSearchWithEos) {
  // Two words plus EOS: every sequence of length <= 3.
  const auto vocab = make_vocab({"a", "b"});
  const auto trie = build_trie(build_table({{"b a", 1}}), vocab);
  for (std::uint64_t salt = 0; salt < 100; ++salt) {
    HashLM lm(vocab, salt);
    auto c = config(Beam{27}, 2.0, 1.0);
    c.max_len = 3;
    const auto expected = oracle::exhaustive_best(lm, trie, c);
    const auto got = generate(lm, trie, {}, c);
    EXPECT_EQ(got.tokens, expected.second) << salt;
    EXPECT_NEAR(got.total_logprob, expected.first, 1e-12);
  }
}

// Random trie over word ids [4, vocab) with a random active state.
struct RandomBoostCase {
  NextTokenDistribution dist;
  KeywordTrie trie;
  MatchState state;
  std::vector<double> bonus;
};

RandomBoostCase random_case(std::mt19937_64& rng, double mu) {
  const std::size_t n = 6 + rng() % 10;
  std::vector<std::string> words;
  for (std::size_t i = 4; i < n; ++i) words.push_back("w" + std::to_string(100 + i));
  const auto vocab = Vocabulary::from_words(words);
  KeywordCounts counts;
  for (std::size_t i = 1 + rng() % 4; i > 0; --i) {
    std::string phrase;
    for (std::size_t w = 1 + rng() % 3; w > 0; --w) phrase += words[rng() % words.size()] + " ";
    counts[phrase.substr(0, phrase.size() - 1)] = 1 + rng() % 20;
  }
  RandomBoostCase c;
  c.trie = build_trie(build_table(counts), vocab);
  for (int steps = static_cast<int>(rng() % 4); steps > 0; --steps) {
    c.state = advance_matches(c.state, 4 + rng() % (n - 4), c.trie);
  }
  std::uniform_real_distribution<double> u(0.001, 1.0);
  std::vector<double> p(n);
  for (auto& x : p) x = u(rng);
  c.dist = NextTokenDistribution(p);
  c.dist.normalize();
  c.bonus = keyword_bonus(n, c.state, c.trie, mu);
  return c;
}

TEST(BoostProperties, NormalizedAndRatioPreserving) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lambda = 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const double mu = 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto c = random_case(rng, mu);
    const auto out = keys_boost(c.dist, c.state, c.trie, lambda, mu);
    ASSERT_TRUE(out.is_valid(1e-9)) << out.sum();
    for (TokenId x = 0; x < out.size(); ++x) {
      for (TokenId y = 0; y < out.size(); ++y) {
        if (c.bonus[x] == 0.0 && c.bonus[y] == 0.0) {
          EXPECT_NEAR(out[x] / out[y], c.dist[x] / c.dist[y], 1e-12 * c.dist[x] / c.dist[y]);
        }
      }
    }
  }
}

TEST(BoostProperties, MonotoneInLambdaAndMu) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const double mu = 1.0;
    const auto c = random_case(rng, mu);
    const double top = *std::max_element(c.bonus.begin(), c.bonus.end());
    const auto lo = keys_boost(c.dist, c.state, c.trie, 1.0, mu);
    const auto hi = keys_boost(c.dist, c.state, c.trie, 2.0, mu);
    const auto hi_mu = keys_boost(c.dist, c.state, c.trie, 1.0, 2.0 * mu);
    for (TokenId x = 0; x < c.dist.size(); ++x) {
      if (c.bonus[x] == 0.0) {
        EXPECT_LE(hi[x], lo[x] * (1 + 1e-12));
        EXPECT_LE(hi_mu[x], lo[x] * (1 + 1e-12));
      }
      if (c.bonus[x] == top) {
        EXPECT_GE(hi[x], lo[x] * (1 - 1e-12));
      }
    }
  }
}

TEST(BoostProperties, DominantTokenStaysOnTop) {
  std::mt19937_64 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = random_case(rng, 1.0);
    const TokenId top = argmax(c.dist);
    if (c.bonus[top] < *std::max_element(c.bonus.begin(), c.bonus.end())) continue;
    ++checked;
    EXPECT_EQ(argmax(keys_boost(c.dist, c.state, c.trie, 4.0, 1.0)), top);
  }
  EXPECT_GT(checked, 0);
}

TEST(StrategyProperties, FullCandidateSetsAgree) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(2 + rng() % 20);
    for (auto& x : p) x = u(rng);
    NextTokenDistribution d(p);
    d.normalize();
    const auto k = candidate_set(d, TopK{d.size()});
    EXPECT_EQ(k.size(), d.size());
    EXPECT_EQ(candidate_set(d, TopP{1.0}), k);
    EXPECT_EQ(candidate_set(d, Temperature{1.0}), k);
    EXPECT_LE(linf(strategy_distribution(d, Temperature{1.0}), d), 1e-12);
    EXPECT_EQ(candidate_set(d, TopK{1}), (std::vector<TokenId>{argmax(d)}));
  }
}

}  // namespace
}  // namespace keys
