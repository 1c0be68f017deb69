// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace keys {

// A lowercase word list; lookups are case-insensitive.
class StopwordSet {
 public:
  StopwordSet() = default;
  StopwordSet(std::initializer_list<std::string_view> words);
  explicit StopwordSet(const std::vector<std::string>& words);

  // One word per line, '#' starts a comment. Throws DataError if the file is
  // missing or contains no words.
  static StopwordSet load(const std::filesystem::path& path);

  // The bundled SMART list.
  static StopwordSet english();

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

const std::vector<std::string>& default_english_stopwords();

using Phrase = std::vector<std::string>;

struct ScoredKeyword {
  Phrase phrase;
  double score = 0.0;

  std::string text() const;
};

inline constexpr std::size_t kDefaultMaxPhraseWords = 5;

// Candidate phrases in order of occurrence, duplicates kept. Phrases break at
// stopwords and at any character other than alphanumerics, hyphens,
// apostrophes and whitespace. Candidates longer than max_words are discarded.
std::vector<Phrase> split_candidates(std::string_view text, const StopwordSet& stops,
                                     std::size_t max_words = kDefaultMaxPhraseWords);

// Degree/frequency word scores summed per phrase. For each word, freq counts
// its occurrences over all candidates and deg adds the full length of every
// candidate containing it. Output is deduplicated and sorted by descending
// score, then by phrase text.
std::vector<ScoredKeyword> score_keywords(const std::vector<Phrase>& candidates);

std::vector<ScoredKeyword> rake(std::string_view text, const StopwordSet& stops, std::size_t top_t,
                                std::size_t max_words = kDefaultMaxPhraseWords);

nlohmann::json keywords_to_json(const std::vector<ScoredKeyword>& keywords);
std::vector<ScoredKeyword> keywords_from_json(const nlohmann::json& j);

}  // namespace keys
