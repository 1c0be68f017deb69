// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "keys/corpus.hpp"
#include "keys/rake.hpp"
#include "keys/vocab.hpp"

namespace keys {

using KeywordCounts = std::map<std::string, std::uint64_t>;

// Counts case-insensitive occurrences of each phrase across docs, aligned to
// word boundaries of the shared word tokenizer. Zero-count phrases are
// dropped; throws DataError("no grounded keywords") if nothing is left.
KeywordCounts count_keywords(std::span<const Phrase> keywords, std::span<const Document> docs);

// Keyword lookup table: phrase -> corpus count, normalized by the highest
// count. Weights are stored as count pairs and divided on demand.
class KeywordTable {
 public:
  KeywordTable() = default;

  const KeywordCounts& entries() const { return entries_; }
  std::uint64_t max_count() const { return max_count_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  std::optional<std::uint64_t> count(std::string_view phrase) const;

  // count / max_count, in (0, 1]. Throws std::out_of_range for unknown phrases.
  double alpha(std::string_view phrase) const;
  std::map<std::string, double> alphas() const;

  nlohmann::ordered_json to_json() const;
  static KeywordTable from_json(const nlohmann::json& j);

  bool operator==(const KeywordTable&) const = default;

 private:
  friend KeywordTable build_table(const KeywordCounts& counts);

  KeywordCounts entries_;
  std::uint64_t max_count_ = 0;
};

// Throws ConfigError on an empty map or a zero count.
KeywordTable build_table(const KeywordCounts& counts);

// Token-level trie over tokenized keywords. Each node records the largest
// keyword weight reachable below it, which is what decoding-time lookups need.
class KeywordTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Terminal {
    std::string phrase;
    double alpha = 0.0;
  };

  struct Node {
    std::map<TokenId, NodeId> children;
    std::optional<Terminal> terminal;
    double max_alpha = 0.0;
    std::size_t depth = 0;
  };

  KeywordTrie();

  void insert(std::span<const TokenId> tokens, std::string phrase, double alpha);

  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::optional<NodeId> child(NodeId parent, TokenId token) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t terminal_count() const { return terminals_; }
  bool empty() const { return terminals_ == 0; }

 private:
  std::vector<Node> nodes_;
  std::size_t terminals_ = 0;
};

// Phrases containing a word missing from the vocabulary are skipped and,
// when `dropped` is given, reported there. Throws DataError if the table is
// non-empty but no phrase survives.
KeywordTrie build_trie(const KeywordTable& table, const Vocabulary& vocab,
                       std::vector<std::string>* dropped = nullptr);

}  // namespace keys
