// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace keys {

using TokenSpan = std::span<const std::string>;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

RougeScore make_rouge(double precision, double recall);

struct BleuScore {
  double bleu = 0.0;
  std::array<double, 4> precisions{};  // unused orders stay 0
  double brevity_penalty = 0.0;
};

// Clipped n-gram overlap. Empty n-gram sets score 0.
RougeScore rouge_n(TokenSpan candidate, TokenSpan reference, std::size_t n);

std::size_t lcs_length(TokenSpan a, TokenSpan b);

RougeScore rouge_l(TokenSpan candidate, TokenSpan reference);

// Summary-level LCS. Both texts are split into sentences on newlines and
// tokenized with word_tokens(); each reference sentence contributes the
// union of its LCS hits against every candidate sentence, clipped by the
// remaining token counts on both sides.
RougeScore rouge_lsum(std::string_view candidate, std::string_view reference);

// Sentence BLEU with clipped modified precision against the per-n-gram
// maximum reference count, uniform weights over orders 1..max_n, and the
// brevity penalty against the closest reference length (shorter on ties).
// Zero-match orders are smoothed to 1 / (total + 1). An empty candidate
// scores 0.
BleuScore bleu(TokenSpan candidate, const std::vector<std::vector<std::string>>& references,
               std::size_t max_n = 4);

struct MetricSet {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rouge_l;
  RougeScore rouge_lsum;
  BleuScore bleu;
};

// Tokenizes both texts with word_tokens() and computes every metric.
MetricSet score_answer(std::string_view candidate, std::string_view reference);

nlohmann::ordered_json to_json(const RougeScore& score);
nlohmann::ordered_json to_json(const BleuScore& score);
nlohmann::ordered_json to_json(const MetricSet& scores);

}  // namespace keys
