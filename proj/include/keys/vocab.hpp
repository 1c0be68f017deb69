// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace keys {

using TokenId = std::uint32_t;

// Word-level vocabulary. Ids 0..3 are reserved for the structural markers;
// ordinary words follow in lexicographic order.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kSep = 3;
  static constexpr std::size_t kNumReserved = 4;

  Vocabulary();

  // Deduplicates and sorts; words colliding with a reserved marker are ignored.
  static Vocabulary from_words(std::span<const std::string> words);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  std::optional<TokenId> find(std::string_view word) const;
  TokenId id(std::string_view word) const { return find(word).value_or(kUnk); }

  static bool is_reserved(TokenId id) { return id < kNumReserved; }

  // word_tokens() followed by lookup; unknown words map to kUnk.
  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace keys
