// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "keys/vocab.hpp"

namespace keys {

// What an answer is conditioned on: the question and any retrieved passages.
struct ConditioningContext {
  std::vector<TokenId> question;
  std::vector<std::vector<TokenId>> passages;
};

// A probability vector indexed by token id.
class NextTokenDistribution {
 public:
  NextTokenDistribution() = default;
  explicit NextTokenDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::size_t size() const { return probs_.size(); }
  double operator[](TokenId id) const { return probs_[id]; }
  double& operator[](TokenId id) { return probs_[id]; }
  std::span<const double> probs() const { return probs_; }
  std::vector<double>& mutable_probs() { return probs_; }

  double sum() const;

  // Non-negative, finite, and summing to one within `tolerance`.
  bool is_valid(double tolerance = 1e-9) const;

  // Divides by the total mass. Throws std::domain_error if there is none.
  void normalize();

  bool operator==(const NextTokenDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

// Anything that returns a full next-token distribution given the generated
// history and the conditioning context can be decoded with KEYS.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual const Vocabulary& vocab() const = 0;
  virtual NextTokenDistribution next_dist(std::span<const TokenId> history,
                                          const ConditioningContext& ctx) const = 0;
};

struct TrainingPair {
  std::vector<TokenId> question;
  std::vector<TokenId> answer;
};

inline constexpr std::string_view kNGramMagic = "KEYSNGLM1";

// Add-k smoothed n-gram model over [BOS, question, SEP, answer, EOS]
// sequences. Only answer positions (and the closing EOS) are counted, so the
// model estimates P(answer token | preceding tokens, question).
class NGramModel final : public LanguageModel {
 public:
  using Context = std::vector<TokenId>;

  struct ContextCounts {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;

    bool operator==(const ContextCounts&) const = default;
  };

  const Vocabulary& vocab() const override { return vocab_; }

  // Uses the longest suffix of [BOS, question, SEP, history] (at most
  // order - 1 tokens) that was seen in training, down to the unigram context.
  NextTokenDistribution next_dist(std::span<const TokenId> history,
                                  const ConditioningContext& ctx) const override;

  int order() const { return order_; }
  double smoothing() const { return k_; }

  std::uint64_t count(const Context& context, TokenId token) const;
  std::uint64_t context_total(const Context& context) const;
  const std::map<Context, ContextCounts>& counts() const { return counts_; }

  void save(std::ostream& out) const;
  static NGramModel load(std::istream& in);

  bool operator==(const NGramModel& other) const {
    return order_ == other.order_ && k_ == other.k_ && vocab_ == other.vocab_ && counts_ == other.counts_;
  }

 private:
  friend NGramModel train_ngram(Vocabulary vocab, std::span<const TrainingPair> corpus, int order, double k);

  int order_ = 1;
  double k_ = 0.1;
  Vocabulary vocab_;
  std::map<Context, ContextCounts> counts_;
};

// order in [1, 5], k > 0, corpus non-empty.
NGramModel train_ngram(Vocabulary vocab, std::span<const TrainingPair> corpus, int order, double k);

}  // namespace keys
