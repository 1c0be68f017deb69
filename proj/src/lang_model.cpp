// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/lang_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "keys/error.hpp"

namespace keys {

double NextTokenDistribution::sum() const {
  double total = 0.0;
  for (double p : probs_) total += p;
  return total;
}

bool NextTokenDistribution::is_valid(double tolerance) const {
  if (probs_.empty()) return false;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) return false;
  }
  return std::abs(sum() - 1.0) <= tolerance;
}

void NextTokenDistribution::normalize() {
  const double total = sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw std::domain_error("distribution has no probability mass");
  for (double& p : probs_) p /= total;
}

NGramModel train_ngram(Vocabulary vocab, std::span<const TrainingPair> corpus, int order, double k) {
  if (order < 1 || order > 5) throw ConfigError("n-gram order must be in [1, 5]");
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("smoothing constant k must be positive");
  if (corpus.empty()) throw DataError("cannot train on an empty corpus");

  NGramModel model;
  model.order_ = order;
  model.k_ = k;
  model.vocab_ = std::move(vocab);

  std::vector<TokenId> seq;
  for (const auto& pair : corpus) {
    seq.clear();
    seq.push_back(Vocabulary::kBos);
    seq.insert(seq.end(), pair.question.begin(), pair.question.end());
    seq.push_back(Vocabulary::kSep);
    const std::size_t answer_start = seq.size();
    seq.insert(seq.end(), pair.answer.begin(), pair.answer.end());
    seq.push_back(Vocabulary::kEos);
    for (auto id : seq) {
      if (id >= model.vocab_.size()) throw DataError("training token id outside the vocabulary");
    }

    for (std::size_t i = answer_start; i < seq.size(); ++i) {
      for (std::size_t len = 0; len < static_cast<std::size_t>(order) && len <= i; ++len) {
        NGramModel::Context context(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                                    seq.begin() + static_cast<std::ptrdiff_t>(i));
        auto& cc = model.counts_[context];
        ++cc.next[seq[i]];
        ++cc.total;
      }
    }
  }
  return model;
}

std::uint64_t NGramModel::count(const Context& context, TokenId token) const {
  auto it = counts_.find(context);
  if (it == counts_.end()) return 0;
  auto jt = it->second.next.find(token);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NGramModel::context_total(const Context& context) const {
  auto it = counts_.find(context);
  return it == counts_.end() ? 0 : it->second.total;
}

NextTokenDistribution NGramModel::next_dist(std::span<const TokenId> history, const ConditioningContext& ctx) const {
  const std::size_t vocab_size = vocab_.size();
  for (auto id : history) {
    if (id >= vocab_size) throw ConfigError("history token " + std::to_string(id) + " outside the vocabulary");
  }

  std::vector<TokenId> full;
  full.reserve(ctx.question.size() + history.size() + 2);
  full.push_back(Vocabulary::kBos);
  for (auto id : ctx.question) full.push_back(id < vocab_size ? id : Vocabulary::kUnk);
  full.push_back(Vocabulary::kSep);
  full.insert(full.end(), history.begin(), history.end());

  const ContextCounts* found = nullptr;
  const std::size_t longest = std::min(static_cast<std::size_t>(order_ - 1), full.size());
  for (std::size_t len = longest + 1; len-- > 0;) {
    Context context(full.end() - static_cast<std::ptrdiff_t>(len), full.end());
    auto it = counts_.find(context);
    if (it != counts_.end() && it->second.total > 0) {
      found = &it->second;
      break;
    }
  }

  const double total = found ? static_cast<double>(found->total) : 0.0;
  const double denom = total + k_ * static_cast<double>(vocab_size);
  std::vector<double> probs(vocab_size, k_ / denom);
  if (found) {
    for (const auto& [token, c] : found->next) probs[token] = (static_cast<double>(c) + k_) / denom;
  }
  return NextTokenDistribution(std::move(probs));
}

void NGramModel::save(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["order"] = order_;
  j["k"] = k_;
  j["vocab"] = vocab_.tokens();
  auto counts = nlohmann::ordered_json::array();
  for (const auto& [context, cc] : counts_) {
    nlohmann::ordered_json entry;
    entry["context"] = context;
    auto next = nlohmann::ordered_json::array();
    for (const auto& [token, c] : cc.next) next.push_back({token, c});
    entry["next"] = std::move(next);
    counts.push_back(std::move(entry));
  }
  j["counts"] = std::move(counts);
  out << kNGramMagic << '\n' << j.dump() << '\n';
}

NGramModel NGramModel::load(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kNGramMagic) {
    throw DataError("not a KEYS n-gram model (missing " + std::string(kNGramMagic) + " header)");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed n-gram model body: ") + e.what());
  }
  try {
    const auto tokens = j.at("vocab").get<std::vector<std::string>>();
    Vocabulary defaults;
    if (tokens.size() < Vocabulary::kNumReserved ||
        !std::equal(defaults.tokens().begin(), defaults.tokens().end(), tokens.begin())) {
      throw DataError("n-gram model vocabulary lacks the reserved markers");
    }
    std::vector<std::string> words(tokens.begin() + Vocabulary::kNumReserved, tokens.end());
    NGramModel model;
    model.order_ = j.at("order").get<int>();
    model.k_ = j.at("k").get<double>();
    model.vocab_ = Vocabulary::from_words(words);
    if (model.vocab_.tokens() != tokens) throw DataError("n-gram model vocabulary is not in canonical order");
    if (model.order_ < 1 || model.order_ > 5 || !(model.k_ > 0.0)) throw DataError("invalid n-gram model header");
    for (const auto& entry : j.at("counts")) {
      auto context = entry.at("context").get<Context>();
      auto& cc = model.counts_[std::move(context)];
      for (const auto& pair : entry.at("next")) {
        const auto token = pair.at(0).get<TokenId>();
        const auto c = pair.at(1).get<std::uint64_t>();
        if (token >= model.vocab_.size() || c == 0) throw DataError("invalid n-gram count entry");
        cc.next[token] = c;
        cc.total += c;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed n-gram model: ") + e.what());
  }
}

}  // namespace keys
