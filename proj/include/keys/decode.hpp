// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "keys/keyword_table.hpp"
#include "keys/lang_model.hpp"
#include "keys/vocab.hpp"

namespace keys {

struct Greedy {
  bool operator==(const Greedy&) const = default;
};
struct Temperature {
  double tau = 1.0;
  bool operator==(const Temperature&) const = default;
};
struct TopK {
  std::size_t k = 1;
  bool operator==(const TopK&) const = default;
};
struct TopP {
  double p = 1.0;
  bool operator==(const TopP&) const = default;
};
struct Beam {
  std::size_t width = 1;
  bool operator==(const Beam&) const = default;
};

using Strategy = std::variant<Greedy, Temperature, TopK, TopP, Beam>;

std::string strategy_name(const Strategy& strategy);

// promoted: P'(x) ∝ P(x) * (1 + lambda * b(x)).
// literal:  P'(x) ∝ P(x) * b(x) for keyword tokens, unchanged otherwise;
//           lambda only switches it on (lambda > 0).
enum class BoostForm { promoted, literal };

BoostForm parse_boost_form(std::string_view name);
std::string_view boost_form_name(BoostForm form);

struct DecoderConfig {
  Strategy strategy = Greedy{};
  double lambda = 0.0;  // keyword weight
  double mu = 0.0;      // keyword/history overlap weight
  BoostForm boost_form = BoostForm::promoted;
  std::size_t max_len = 32;
  std::size_t min_len = 0;
  std::uint64_t seed = 0;
  bool trace = false;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  bool operator==(const DecoderConfig&) const = default;
};

nlohmann::ordered_json decoder_config_to_json(const DecoderConfig& config);

// Keys: strategy (greedy|temperature|topk|topp|beam), tau, k, p, width,
// lambda, mu, boost_form, min_len, max_len, seed, trace. Missing keys keep
// the values already in `base`.
DecoderConfig decoder_config_from_json(const nlohmann::json& j, DecoderConfig base = {});

struct ActiveMatch {
  KeywordTrie::NodeId node = KeywordTrie::kRoot;
  std::size_t depth = 0;

  bool operator==(const ActiveMatch&) const = default;
};

// Every suffix of the generated history that spells a proper prefix of some
// keyword, as the trie node it reaches and its length in tokens.
struct MatchState {
  std::vector<ActiveMatch> active;

  bool empty() const { return active.empty(); }
  std::vector<std::size_t> depths() const;

  bool operator==(const MatchState&) const = default;
};

// b(x): the best weight token x earns by starting a keyword (its alpha) or by
// continuing an active match of depth j (alpha * (1 + mu * j)). Zero for
// tokens that do neither and for reserved markers.
std::vector<double> keyword_bonus(std::size_t vocab_size, const MatchState& state, const KeywordTrie& trie,
                                  double mu);

// Re-weights `dist` towards keyword tokens and renormalizes. Returns `dist`
// unchanged when lambda is zero or no token has a positive bonus.
NextTokenDistribution keys_boost(const NextTokenDistribution& dist, const MatchState& state,
                                 const KeywordTrie& trie, double lambda, double mu,
                                 BoostForm form = BoostForm::promoted);

MatchState advance_matches(const MatchState& state, TokenId chosen, const KeywordTrie& trie);

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

// Token ids a strategy may emit, in ascending id order. Zero-probability
// tokens are never candidates.
std::vector<TokenId> candidate_set(const NextTokenDistribution& dist, const Strategy& strategy);

// The renormalized distribution a strategy samples from; Greedy is one-hot.
NextTokenDistribution strategy_distribution(const NextTokenDistribution& dist, const Strategy& strategy);

// Greedy takes the argmax without touching rng. Throws ConfigError for Beam.
TokenId apply_strategy(const NextTokenDistribution& dist, const Strategy& strategy, Rng& rng);

// Lowest id among the maximal entries.
TokenId argmax(const NextTokenDistribution& dist);

// Zeroes BOS, SEP and UNK, plus EOS while step < min_len, and renormalizes
// if any mass was removed.
void mask_for_step(NextTokenDistribution& dist, std::size_t step, std::size_t min_len);

struct TokenProb {
  TokenId token = 0;
  double prob = 0.0;
};

// Top `n` entries by descending probability, ties by ascending id.
std::vector<TokenProb> top_tokens(const NextTokenDistribution& dist, std::size_t n = 10);

struct StepTrace {
  std::size_t step = 0;
  std::vector<TokenProb> pre_boost;
  std::vector<TokenProb> post_boost;
  TokenId chosen = 0;
  std::vector<std::size_t> match_depths;
};

struct GeneratedAnswer {
  std::vector<TokenId> tokens;  // without the closing EOS
  std::string text;
  std::vector<StepTrace> trace;
  // Sum of log post-boost probabilities of every chosen token, EOS included.
  double total_logprob = 0.0;
};

// Step loop: model distribution, keyword boost, masking, strategy, match
// update; stops at EOS or max_len. Dispatches to generate_beam for Beam.
GeneratedAnswer generate(const LanguageModel& lm, const KeywordTrie& trie, const ConditioningContext& ctx,
                         const DecoderConfig& config);

// Beam search over post-boost log-probabilities without length
// normalization. Each hypothesis carries its own match state; ties go to the
// lexicographically smallest token sequence.
GeneratedAnswer generate_beam(const LanguageModel& lm, const KeywordTrie& trie, const ConditioningContext& ctx,
                              const DecoderConfig& config);

nlohmann::ordered_json trace_to_json(const std::vector<StepTrace>& trace, const Vocabulary& vocab);

}  // namespace keys
