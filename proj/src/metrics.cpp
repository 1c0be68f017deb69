// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "keys/error.hpp"
#include "keys/text.hpp"

namespace keys {

namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(TokenSpan tokens, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[NGram(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

std::vector<std::vector<std::size_t>> lcs_table(TokenSpan a, TokenSpan b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t;
}

// Indices into `ref` of one LCS with `cand`, recovered right to left.
std::vector<std::size_t> lcs_indices(TokenSpan ref, TokenSpan cand) {
  const auto t = lcs_table(ref, cand);
  std::vector<std::size_t> out;
  std::size_t i = ref.size();
  std::size_t j = cand.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      out.push_back(i - 1);
      --i;
      --j;
    } else if (t[i][j - 1] > t[i - 1][j]) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::string>> sentence_tokens(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : split_lines(text)) {
    auto words = word_tokens(line);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

}  // namespace

RougeScore make_rouge(double precision, double recall) {
  const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return {precision, recall, f1};
}

RougeScore rouge_n(TokenSpan candidate, TokenSpan reference, std::size_t n) {
  if (n == 0) throw ConfigError("rouge_n: n must be at least 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  if (cand.empty() || ref.empty()) return {};
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const double cand_total = static_cast<double>(candidate.size() - n + 1);
  const double ref_total = static_cast<double>(reference.size() - n + 1);
  return make_rouge(static_cast<double>(overlap) / cand_total, static_cast<double>(overlap) / ref_total);
}

std::size_t lcs_length(TokenSpan a, TokenSpan b) { return lcs_table(a, b)[a.size()][b.size()]; }

RougeScore rouge_l(TokenSpan candidate, TokenSpan reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  return make_rouge(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()));
}

RougeScore rouge_lsum(std::string_view candidate, std::string_view reference) {
  const auto cand_sents = sentence_tokens(candidate);
  const auto ref_sents = sentence_tokens(reference);
  std::map<std::string, std::size_t> cand_counts;
  std::map<std::string, std::size_t> ref_counts;
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (const auto& s : cand_sents) {
    cand_len += s.size();
    for (const auto& w : s) ++cand_counts[w];
  }
  for (const auto& s : ref_sents) {
    ref_len += s.size();
    for (const auto& w : s) ++ref_counts[w];
  }
  if (cand_len == 0 || ref_len == 0) return {};

  std::size_t hits = 0;
  for (const auto& ref_sent : ref_sents) {
    std::set<std::size_t> united;
    for (const auto& cand_sent : cand_sents) {
      for (auto idx : lcs_indices(ref_sent, cand_sent)) united.insert(idx);
    }
    for (auto idx : united) {
      const auto& w = ref_sent[idx];
      auto& c = cand_counts[w];
      auto& r = ref_counts[w];
      if (c > 0 && r > 0) {
        ++hits;
        --c;
        --r;
      }
    }
  }
  return make_rouge(static_cast<double>(hits) / static_cast<double>(cand_len),
                    static_cast<double>(hits) / static_cast<double>(ref_len));
}

BleuScore bleu(TokenSpan candidate, const std::vector<std::vector<std::string>>& references, std::size_t max_n) {
  if (max_n < 1 || max_n > 4) throw ConfigError("bleu: max_n must be in [1, 4]");
  if (references.empty()) throw ConfigError("bleu: at least one reference is required");
  BleuScore score;
  const std::size_t c = candidate.size();
  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) r = ref.size();
  }
  if (c == 0) return score;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    std::map<NGram, std::size_t> max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : ngram_counts(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
    }
    std::size_t matches = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matches += std::min(count, it->second);
    }
    const double p = matches > 0 ? static_cast<double>(matches) / static_cast<double>(total)
                                 : 1.0 / static_cast<double>(total + 1);
    score.precisions[n - 1] = p;
    log_sum += std::log(p);
  }
  score.brevity_penalty = c <= r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  score.bleu = score.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n));
  return score;
}

MetricSet score_answer(std::string_view candidate, std::string_view reference) {
  const auto cand = word_tokens(candidate);
  const auto ref = word_tokens(reference);
  MetricSet m;
  m.rouge1 = rouge_n(cand, ref, 1);
  m.rouge2 = rouge_n(cand, ref, 2);
  m.rouge_l = rouge_l(cand, ref);
  m.rouge_lsum = rouge_lsum(candidate, reference);
  m.bleu = bleu(cand, {ref});
  return m;
}

nlohmann::ordered_json to_json(const RougeScore& score) {
  nlohmann::ordered_json j;
  j["precision"] = score.precision;
  j["recall"] = score.recall;
  j["f1"] = score.f1;
  return j;
}

nlohmann::ordered_json to_json(const BleuScore& score) {
  nlohmann::ordered_json j;
  j["bleu"] = score.bleu;
  j["precisions"] = score.precisions;
  j["brevity_penalty"] = score.brevity_penalty;
  return j;
}

nlohmann::ordered_json to_json(const MetricSet& scores) {
  nlohmann::ordered_json j;
  j["rouge1"] = to_json(scores.rouge1);
  j["rouge2"] = to_json(scores.rouge2);
  j["rougeL"] = to_json(scores.rouge_l);
  j["rougeLsum"] = to_json(scores.rouge_lsum);
  j["bleu"] = to_json(scores.bleu);
  return j;
}

}  // namespace keys
