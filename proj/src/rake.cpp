// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/rake.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "keys/error.hpp"
#include "keys/text.hpp"

namespace keys {

StopwordSet::StopwordSet(std::initializer_list<std::string_view> words) {
  for (auto w : words) words_.insert(to_lower(w));
}

StopwordSet::StopwordSet(const std::vector<std::string>& words) {
  for (const auto& w : words) words_.insert(to_lower(w));
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto word = trim(line);
    if (!word.empty()) words.push_back(std::move(word));
  }
  if (words.empty()) throw DataError("stopword file has no words: " + path.string());
  return StopwordSet(words);
}

StopwordSet StopwordSet::english() { return StopwordSet(default_english_stopwords()); }

bool StopwordSet::contains(std::string_view word) const { return words_.count(to_lower(word)) > 0; }

std::string ScoredKeyword::text() const { return join(phrase); }

std::vector<Phrase> split_candidates(std::string_view text, const StopwordSet& stops,
                                     std::size_t max_words) {
  std::vector<Phrase> out;
  Phrase current;
  std::string word;

  auto end_phrase = [&] {
    if (!current.empty() && current.size() <= max_words) out.push_back(current);
    current.clear();
  };
  auto end_word = [&] {
    // Hyphens and apostrophes only join words; a run made only of them is
    // punctuation.
    auto cleaned = word_tokens(word);
    word.clear();
    if (cleaned.empty()) return;
    if (stops.contains(cleaned.front())) {
      end_phrase();
    } else {
      current.push_back(std::move(cleaned.front()));
    }
  };

  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c) || c == '-' || c == '\'') {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      if (!word.empty()) {
        const bool punctuation_only = word_tokens(word).empty();
        end_word();
        if (punctuation_only) end_phrase();
      }
    } else {
      if (!word.empty()) end_word();
      end_phrase();
    }
  }
  if (!word.empty()) {
    const bool punctuation_only = word_tokens(word).empty();
    end_word();
    if (punctuation_only) end_phrase();
  }
  end_phrase();
  return out;
}

std::vector<ScoredKeyword> score_keywords(const std::vector<Phrase>& candidates) {
  std::map<std::string, double> freq;
  std::map<std::string, double> degree;
  for (const auto& phrase : candidates) {
    for (const auto& w : phrase) {
      freq[w] += 1.0;
      degree[w] += static_cast<double>(phrase.size());
    }
  }

  std::map<std::string, ScoredKeyword> unique;
  for (const auto& phrase : candidates) {
    if (phrase.empty()) continue;
    auto key = join(phrase);
    if (unique.count(key)) continue;
    double score = 0.0;
    for (const auto& w : phrase) score += degree[w] / freq[w];
    unique.emplace(std::move(key), ScoredKeyword{phrase, score});
  }

  std::vector<std::pair<std::string, ScoredKeyword>> sorted(unique.begin(), unique.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return a.second.score > b.second.score;
    return a.first < b.first;
  });
  std::vector<ScoredKeyword> out;
  out.reserve(sorted.size());
  for (auto& entry : sorted) out.push_back(std::move(entry.second));
  return out;
}

std::vector<ScoredKeyword> rake(std::string_view text, const StopwordSet& stops, std::size_t top_t,
                                std::size_t max_words) {
  if (top_t == 0) throw ConfigError("rake: top_t must be at least 1");
  auto scored = score_keywords(split_candidates(text, stops, max_words));
  if (scored.size() > top_t) scored.resize(top_t);
  return scored;
}

nlohmann::json keywords_to_json(const std::vector<ScoredKeyword>& keywords) {
  auto out = nlohmann::json::array();
  for (const auto& kw : keywords) {
    out.push_back({{"phrase", kw.text()}, {"score", kw.score}});
  }
  return out;
}

std::vector<ScoredKeyword> keywords_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("keyword file must be a JSON array of {phrase, score}");
  std::vector<ScoredKeyword> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("phrase") || !item["phrase"].is_string()) {
      throw DataError("keyword entry lacks a string \"phrase\"");
    }
    auto words = word_tokens(item["phrase"].get<std::string>());
    if (words.empty()) continue;
    out.push_back({std::move(words), item.value("score", 0.0)});
  }
  return out;
}

}  // namespace keys
