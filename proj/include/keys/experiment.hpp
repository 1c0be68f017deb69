// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keys/corpus.hpp"
#include "keys/decode.hpp"
#include "keys/keyword_table.hpp"
#include "keys/lang_model.hpp"
#include "keys/rake.hpp"

namespace keys {

struct QaExample {
  std::string id;
  std::string question;
  std::string answer;
  std::vector<std::string> passages;
};

// JSONL with "question" and optional "id", "answer", "passages". Missing ids
// become q0001, q0002, ... by line.
std::vector<QaExample> load_dataset(const std::filesystem::path& path);

enum class RakeScope { concat, per_doc };

RakeScope parse_rake_scope(std::string_view name);
std::string_view rake_scope_name(RakeScope scope);

struct KnowledgeOptions {
  std::size_t retrieve_k = 5;
  std::size_t rake_top = 20;
  RakeScope scope = RakeScope::concat;
  std::size_t max_phrase_words = kDefaultMaxPhraseWords;
  Bm25Params bm25;
};

// The question's own passages plus the top retrieved documents, if a
// knowledge base is given.
std::vector<Document> gather_knowledge(const KnowledgeBase* kb, const QaExample& example,
                                       const KnowledgeOptions& options);

std::vector<Phrase> extract_keywords(std::span<const Document> docs, const StopwordSet& stops,
                                     const KnowledgeOptions& options);

// RAKE over the knowledge, counted back into the same documents. Empty when no
// keyword is grounded.
KeywordTable knowledge_table(std::span<const Document> docs, const StopwordSet& stops,
                             const KnowledgeOptions& options);

// Trie for decoding; empty when the table is empty or nothing tokenizes.
KeywordTrie knowledge_trie(const KeywordTable& table, const Vocabulary& vocab);

// Words from training questions, answers and passages, plus the knowledge base.
Vocabulary build_vocabulary(std::span<const QaExample> train, const KnowledgeBase* kb);

// Corpus sentences (split at . ! ? ; and newlines) as answers with an empty
// question, so the model also learns unconditioned knowledge-base text.
std::vector<TrainingPair> corpus_sentence_pairs(const KnowledgeBase& kb, const Vocabulary& vocab);

// Trains on the question/answer pairs and, when `corpus_sentences` is set,
// on the knowledge base's sentences as well.
NGramModel train_on_examples(std::span<const QaExample> train, const KnowledgeBase* kb, int order, double k,
                             bool corpus_sentences = false);

ConditioningContext make_context(const Vocabulary& vocab, const QaExample& example,
                                 std::span<const Document> knowledge);

struct GridRow {
  std::string label;
  DecoderConfig config;
};

struct ExperimentSpec {
  std::string corpus;  // optional
  CorpusFormat corpus_format = CorpusFormat::jsonl;
  std::string train;
  std::string dataset;
  std::string stopwords;  // empty: bundled list
  int order = 3;
  double smoothing = 0.1;
  bool lm_corpus_sentences = false;
  KnowledgeOptions knowledge;
  std::vector<GridRow> grid;
  std::vector<std::uint64_t> seeds;  // empty: each row's own seed
  std::filesystem::path base_dir;    // relative paths resolve against this

  static ExperimentSpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::ordered_json to_json() const;
  void validate() const;
  std::filesystem::path resolve(const std::string& path) const;
};

// Runs every grid row over the dataset and returns the report. Per-question
// failures are recorded under "errors" instead of aborting the run.
nlohmann::ordered_json run_experiment(const ExperimentSpec& spec);

}  // namespace keys
