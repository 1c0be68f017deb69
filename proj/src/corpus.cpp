// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "keys/error.hpp"
#include "keys/text.hpp"

namespace keys {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

TermStats compute_stats(const std::vector<Document>& docs) {
  TermStats stats;
  stats.term_freq.reserve(docs.size());
  stats.doc_len.reserve(docs.size());
  for (const auto& doc : docs) {
    std::map<std::string, std::size_t> tf;
    const auto terms = index_terms(doc.text);
    for (const auto& term : terms) ++tf[term];
    for (const auto& [term, count] : tf) ++stats.doc_freq[term];
    stats.doc_len.push_back(terms.size());
    stats.term_freq.push_back(std::move(tf));
  }
  return stats;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& doc = docs_[i];
    if (doc.id.empty()) throw DataError("document " + std::to_string(i) + " has an empty id");
    if (trim(doc.text).empty()) throw DataError("document '" + doc.id + "' has empty text");
    if (!index_.emplace(doc.id, i).second) throw DataError("duplicate document id '" + doc.id + "'");
  }
  stats_ = compute_stats(docs_);
  std::size_t total_len = 0;
  for (auto len : stats_.doc_len) total_len += len;
  avg_doc_len_ = docs_.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(docs_.size());
}

const Document* KnowledgeBase::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &docs_[it->second];
}

TermStats KnowledgeBase::rebuild_stats() const { return compute_stats(docs_); }

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "text_dir") return CorpusFormat::text_dir;
  throw ConfigError("unknown corpus format '" + std::string(name) + "' (expected jsonl or text_dir)");
}

namespace {

KnowledgeBase ingest_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Document> docs;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON line: " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("text") || !record["text"].is_string()) {
      throw DataError(where + ": line must be an object with string fields \"id\" and \"text\"");
    }
    Document doc{record["id"].get<std::string>(), record["text"].get<std::string>(),
                 record.value("source", path.string())};
    if (doc.id.empty()) throw DataError(where + ": empty id");
    if (trim(doc.text).empty()) throw DataError(where + ": empty text for id '" + doc.id + "'");
    auto [it, inserted] = first_line.emplace(doc.id, line_no);
    if (!inserted) {
      throw DataError(path.string() + ": duplicate id '" + doc.id + "' on lines " +
                      std::to_string(it->second) + " and " + std::to_string(line_no));
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError("empty corpus: " + path.string());
  return KnowledgeBase(std::move(docs));
}

KnowledgeBase ingest_text_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  if (files.empty()) throw DataError("empty corpus: " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.stem().string() < b.stem().string(); });
  std::vector<Document> docs;
  docs.reserve(files.size());
  for (const auto& file : files) {
    docs.push_back({file.stem().string(), read_file(file), file.string()});
  }
  return KnowledgeBase(std::move(docs));
}

}  // namespace

KnowledgeBase ingest_corpus(const fs::path& path, CorpusFormat format) {
  if (!fs::exists(path)) throw DataError("missing corpus path: " + path.string());
  return format == CorpusFormat::jsonl ? ingest_jsonl(path) : ingest_text_dir(path);
}

void write_corpus_jsonl(const KnowledgeBase& kb, std::ostream& out) {
  for (const auto& doc : kb.docs()) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    record["text"] = doc.text;
    record["source"] = doc.source;
    out << record.dump() << '\n';
  }
}

double bm25_idf(std::size_t total_docs, std::size_t doc_freq) {
  // Lucene's variant; stays positive even for terms present in most documents.
  const double n = static_cast<double>(total_docs);
  const double df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<RetrievalResult> retrieve_top_k(const KnowledgeBase& kb, std::string_view query,
                                            std::size_t k, const Bm25Params& params) {
  if (kb.empty()) throw DataError("cannot retrieve from an empty knowledge base");
  if (k == 0) throw ConfigError("retrieve_top_k: k must be at least 1");
  if (trim(query).empty()) throw ConfigError("retrieve_top_k: empty query");

  const auto terms = index_terms(query);
  const std::set<std::string> unique_terms(terms.begin(), terms.end());
  const auto& stats = kb.term_stats();
  const double avg_len = kb.average_doc_len();

  std::vector<RetrievalResult> results;
  for (std::size_t d = 0; d < kb.total_docs(); ++d) {
    double score = 0.0;
    bool overlap = false;
    const double len_norm = 1.0 - params.b + params.b * static_cast<double>(stats.doc_len[d]) / avg_len;
    for (const auto& term : unique_terms) {
      auto tf_it = stats.term_freq[d].find(term);
      if (tf_it == stats.term_freq[d].end()) continue;
      overlap = true;
      const double tf = static_cast<double>(tf_it->second);
      const double idf = bm25_idf(kb.total_docs(), stats.doc_freq.at(term));
      score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * len_norm);
    }
    if (overlap) results.push_back({kb.docs()[d].id, score, 0});
  }
  std::sort(results.begin(), results.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (results.size() > k) results.resize(k);
  for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
  return results;
}

}  // namespace keys
