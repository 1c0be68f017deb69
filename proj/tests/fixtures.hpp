// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "keys/decode.hpp"
#include "keys/lang_model.hpp"
#include "keys/vocab.hpp"

namespace keys::testing {

// A language model backed by an explicit table: history -> probabilities over
// the vocabulary. Histories not in the table use `fallback`.
class TableLM final : public LanguageModel {
 public:
  TableLM(Vocabulary vocab, std::vector<double> fallback) : vocab_(std::move(vocab)), fallback_(std::move(fallback)) {}

  void set(std::vector<TokenId> history, std::vector<double> probs) { table_[std::move(history)] = std::move(probs); }

  const Vocabulary& vocab() const override { return vocab_; }

  NextTokenDistribution next_dist(std::span<const TokenId> history, const ConditioningContext&) const override {
    auto it = table_.find(std::vector<TokenId>(history.begin(), history.end()));
    return NextTokenDistribution(it == table_.end() ? fallback_ : it->second);
  }

 private:
  Vocabulary vocab_;
  std::vector<double> fallback_;
  std::map<std::vector<TokenId>, std::vector<double>> table_;
};

// Deterministic pseudo-random distribution for every history, mass only on
// EOS and ordinary words.
class HashLM final : public LanguageModel {
 public:
  HashLM(Vocabulary vocab, std::uint64_t salt) : vocab_(std::move(vocab)), salt_(salt) {}

  const Vocabulary& vocab() const override { return vocab_; }

  NextTokenDistribution next_dist(std::span<const TokenId> history, const ConditioningContext&) const override {
    std::uint64_t h = salt_;
    for (auto t : history) h = h * 1000003u + t + 1;
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> probs(vocab_.size(), 0.0);
    probs[Vocabulary::kEos] = u(rng);
    for (TokenId i = Vocabulary::kNumReserved; i < vocab_.size(); ++i) probs[i] = u(rng);
    NextTokenDistribution d(std::move(probs));
    d.normalize();
    return d;
  }

 private:
  Vocabulary vocab_;
  std::uint64_t salt_;
};

inline Vocabulary make_vocab(std::vector<std::string> words) { return Vocabulary::from_words(words); }

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            (name + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace keys::testing
