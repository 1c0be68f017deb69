// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/vocab.hpp"

#include <set>

#include "keys/text.hpp"

namespace keys {

Vocabulary::Vocabulary() : tokens_{"<bos>", "<eos>", "<unk>", "<sep>"} {
  for (TokenId i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary vocab;
  std::set<std::string> unique(words.begin(), words.end());
  for (const auto& w : unique) {
    if (w.empty() || vocab.index_.count(w)) continue;
    vocab.index_.emplace(w, static_cast<TokenId>(vocab.tokens_.size()));
    vocab.tokens_.push_back(w);
  }
  return vocab;
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : word_tokens(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out.push_back(' ');
    out.append(token(id));
  }
  return out;
}

}  // namespace keys
