// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/keyword_table.hpp"

#include <algorithm>

#include "keys/error.hpp"
#include "keys/text.hpp"

namespace keys {

KeywordCounts count_keywords(std::span<const Phrase> keywords, std::span<const Document> docs) {
  if (keywords.empty()) throw ConfigError("count_keywords: no keywords given");

  std::vector<std::vector<std::string>> doc_words;
  doc_words.reserve(docs.size());
  for (const auto& doc : docs) doc_words.push_back(word_tokens(doc.text));

  KeywordCounts counts;
  for (const auto& phrase : keywords) {
    // Normalize through the tokenizer so "New York" and "new york" agree.
    const auto words = word_tokens(join(phrase));
    if (words.empty()) continue;
    const auto key = join(words);
    if (counts.count(key)) continue;
    std::uint64_t n = 0;
    for (const auto& text : doc_words) {
      if (text.size() < words.size()) continue;
      for (std::size_t i = 0; i + words.size() <= text.size(); ++i) {
        if (std::equal(words.begin(), words.end(), text.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
      }
    }
    counts.emplace(key, n);
  }
  std::erase_if(counts, [](const auto& entry) { return entry.second == 0; });
  if (counts.empty()) throw DataError("no grounded keywords");
  return counts;
}

KeywordTable build_table(const KeywordCounts& counts) {
  if (counts.empty()) throw ConfigError("build_table: empty keyword counts");
  KeywordTable table;
  for (const auto& [phrase, count] : counts) {
    if (count == 0) throw ConfigError("build_table: zero count for '" + phrase + "'");
    table.max_count_ = std::max(table.max_count_, count);
  }
  table.entries_ = counts;
  return table;
}

std::optional<std::uint64_t> KeywordTable::count(std::string_view phrase) const {
  auto it = entries_.find(std::string(phrase));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double KeywordTable::alpha(std::string_view phrase) const {
  auto c = count(phrase);
  if (!c) throw std::out_of_range("no keyword '" + std::string(phrase) + "'");
  return static_cast<double>(*c) / static_cast<double>(max_count_);
}

std::map<std::string, double> KeywordTable::alphas() const {
  std::map<std::string, double> out;
  for (const auto& [phrase, count] : entries_) {
    out.emplace(phrase, static_cast<double>(count) / static_cast<double>(max_count_));
  }
  return out;
}

nlohmann::ordered_json KeywordTable::to_json() const {
  nlohmann::ordered_json j;
  j["c_h"] = max_count_;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [phrase, count] : entries_) {
    nlohmann::ordered_json e;
    e["phrase"] = phrase;
    e["count"] = count;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

KeywordTable KeywordTable::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw DataError("keyword table must be an object with an \"entries\" array");
  }
  if (j["entries"].empty()) return {};
  KeywordCounts counts;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("phrase") || !e["phrase"].is_string() || !e.contains("count") ||
        !e["count"].is_number_integer() || e["count"].get<std::int64_t>() <= 0) {
      throw DataError("keyword table entries need a string \"phrase\" and a positive integer \"count\"");
    }
    auto phrase = join(word_tokens(e["phrase"].get<std::string>()));
    if (phrase.empty()) throw DataError("keyword table entry has an empty phrase");
    if (!counts.emplace(phrase, e["count"].get<std::uint64_t>()).second) {
      throw DataError("duplicate keyword table phrase '" + phrase + "'");
    }
  }
  auto table = build_table(counts);
  if (j.contains("c_h") && j["c_h"].get<std::uint64_t>() != table.max_count()) {
    throw DataError("keyword table c_h does not match the largest entry count");
  }
  return table;
}

KeywordTrie::KeywordTrie() : nodes_(1) {}

void KeywordTrie::insert(std::span<const TokenId> tokens, std::string phrase, double alpha) {
  if (tokens.empty()) throw ConfigError("cannot insert an empty keyword into the trie");
  NodeId current = kRoot;
  for (auto token : tokens) {
    auto it = nodes_[current].children.find(token);
    NodeId next;
    if (it == nodes_[current].children.end()) {
      next = static_cast<NodeId>(nodes_.size());
      Node fresh;
      fresh.depth = nodes_[current].depth + 1;
      nodes_.push_back(std::move(fresh));
      nodes_[current].children.emplace(token, next);
    } else {
      next = it->second;
    }
    nodes_[next].max_alpha = std::max(nodes_[next].max_alpha, alpha);
    current = next;
  }
  auto& terminal = nodes_[current].terminal;
  if (!terminal) {
    terminal = Terminal{std::move(phrase), alpha};
    ++terminals_;
  } else if (alpha > terminal->alpha) {
    terminal = Terminal{std::move(phrase), alpha};
  }
}

std::optional<KeywordTrie::NodeId> KeywordTrie::child(NodeId parent, TokenId token) const {
  const auto& children = nodes_.at(parent).children;
  auto it = children.find(token);
  if (it == children.end()) return std::nullopt;
  return it->second;
}

KeywordTrie build_trie(const KeywordTable& table, const Vocabulary& vocab, std::vector<std::string>* dropped) {
  KeywordTrie trie;
  for (const auto& [phrase, count] : table.entries()) {
    std::vector<TokenId> ids;
    bool ok = true;
    for (const auto& w : word_tokens(phrase)) {
      auto id = vocab.find(w);
      if (!id || Vocabulary::is_reserved(*id)) {
        ok = false;
        break;
      }
      ids.push_back(*id);
    }
    if (!ok || ids.empty()) {
      if (dropped) dropped->push_back(phrase);
      continue;
    }
    trie.insert(ids, phrase, static_cast<double>(count) / static_cast<double>(table.max_count()));
  }
  if (!table.empty() && trie.empty()) throw DataError("no keyword phrase could be tokenized");
  return trie;
}

}  // namespace keys
