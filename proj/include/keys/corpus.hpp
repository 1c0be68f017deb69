// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace keys {

struct Document {
  std::string id;
  std::string text;
  std::string source;

  bool operator==(const Document&) const = default;
};

// Per-term document frequency and per-document term frequencies over the
// retrieval tokenization. Indexed in document order.
struct TermStats {
  std::map<std::string, std::size_t> doc_freq;
  std::vector<std::map<std::string, std::size_t>> term_freq;
  std::vector<std::size_t> doc_len;

  bool operator==(const TermStats&) const = default;
};

// An immutable, validated collection of documents with precomputed term
// statistics. Safe to share between threads once constructed.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Throws DataError on an empty id, a blank text, or a duplicate id.
  explicit KnowledgeBase(std::vector<Document> docs);

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t total_docs() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const TermStats& term_stats() const { return stats_; }
  double average_doc_len() const { return avg_doc_len_; }

  // nullptr when absent.
  const Document* find(std::string_view id) const;

  // Recomputes statistics from scratch; always equal to term_stats().
  TermStats rebuild_stats() const;

 private:
  std::vector<Document> docs_;
  std::map<std::string, std::size_t, std::less<>> index_;
  TermStats stats_;
  double avg_doc_len_ = 0.0;
};

enum class CorpusFormat { jsonl, text_dir };

CorpusFormat parse_corpus_format(std::string_view name);

// jsonl: one {"id", "text", ["source"]} object per line, blank lines ignored.
// text_dir: every *.txt file in the directory, id = file stem, sorted by id.
KnowledgeBase ingest_corpus(const std::filesystem::path& path, CorpusFormat format);

void write_corpus_jsonl(const KnowledgeBase& kb, std::ostream& out);

struct RetrievalResult {
  std::string doc_id;
  double score = 0.0;
  std::size_t rank = 0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

double bm25_idf(std::size_t total_docs, std::size_t doc_freq);

// Okapi BM25 over the unique query terms. Documents sharing no term with the
// query are excluded; ties are broken by ascending doc id.
std::vector<RetrievalResult> retrieve_top_k(const KnowledgeBase& kb, std::string_view query,
                                            std::size_t k, const Bm25Params& params = {});

}  // namespace keys
