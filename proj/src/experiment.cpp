// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "keys/error.hpp"
#include "keys/metrics.hpp"
#include "keys/text.hpp"

namespace keys {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<QaExample> load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::vector<QaExample> out;
  std::map<std::string, std::size_t> seen;
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
    if (!record.is_object() || !record.contains("question") || !record["question"].is_string()) {
      throw DataError(where + ": record needs a string \"question\"");
    }
    QaExample ex;
    if (record.contains("id")) {
      if (!record["id"].is_string()) throw DataError(where + ": \"id\" must be a string");
      ex.id = record["id"].get<std::string>();
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "q%04zu", line_no);
      ex.id = buf;
    }
    ex.question = record["question"].get<std::string>();
    if (trim(ex.question).empty()) throw DataError(where + ": empty question");
    if (record.contains("answer")) {
      if (!record["answer"].is_string()) throw DataError(where + ": \"answer\" must be a string");
      ex.answer = record["answer"].get<std::string>();
    }
    if (record.contains("passages")) {
      if (!record["passages"].is_array()) throw DataError(where + ": \"passages\" must be an array of strings");
      for (const auto& p : record["passages"]) {
        if (!p.is_string()) throw DataError(where + ": \"passages\" must be an array of strings");
        ex.passages.push_back(p.get<std::string>());
      }
    }
    auto [it, inserted] = seen.emplace(ex.id, line_no);
    if (!inserted) {
      throw DataError(path.string() + ": duplicate id '" + ex.id + "' on lines " + std::to_string(it->second) +
                      " and " + std::to_string(line_no));
    }
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw DataError("empty dataset: " + path.string());
  return out;
}

RakeScope parse_rake_scope(std::string_view name) {
  if (name == "concat") return RakeScope::concat;
  if (name == "per_doc") return RakeScope::per_doc;
  throw ConfigError("unknown rake scope '" + std::string(name) + "' (expected concat or per_doc)");
}

std::string_view rake_scope_name(RakeScope scope) { return scope == RakeScope::concat ? "concat" : "per_doc"; }

std::vector<Document> gather_knowledge(const KnowledgeBase* kb, const QaExample& example,
                                       const KnowledgeOptions& options) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < example.passages.size(); ++i) {
    if (trim(example.passages[i]).empty()) continue;
    docs.push_back({example.id + "#p" + std::to_string(i + 1), example.passages[i], "passage"});
  }
  if (kb && !kb->empty()) {
    for (const auto& hit : retrieve_top_k(*kb, example.question, options.retrieve_k, options.bm25)) {
      docs.push_back(*kb->find(hit.doc_id));
    }
  }
  return docs;
}

std::vector<Phrase> extract_keywords(std::span<const Document> docs, const StopwordSet& stops,
                                     const KnowledgeOptions& options) {
  std::vector<Phrase> phrases;
  if (docs.empty()) return phrases;
  if (options.scope == RakeScope::concat) {
    std::string text;
    for (const auto& doc : docs) {
      text += doc.text;
      // Passages never run into each other.
      text += "\n.\n";
    }
    for (auto& kw : rake(text, stops, options.rake_top, options.max_phrase_words)) {
      phrases.push_back(std::move(kw.phrase));
    }
    return phrases;
  }
  std::set<Phrase> seen;
  for (const auto& doc : docs) {
    for (auto& kw : rake(doc.text, stops, options.rake_top, options.max_phrase_words)) {
      if (seen.insert(kw.phrase).second) phrases.push_back(std::move(kw.phrase));
    }
  }
  return phrases;
}

KeywordTable knowledge_table(std::span<const Document> docs, const StopwordSet& stops,
                             const KnowledgeOptions& options) {
  const auto phrases = extract_keywords(docs, stops, options);
  if (phrases.empty()) return {};
  try {
    return build_table(count_keywords(phrases, docs));
  } catch (const DataError&) {
    return {};
  }
}

KeywordTrie knowledge_trie(const KeywordTable& table, const Vocabulary& vocab) {
  if (table.empty()) return {};
  try {
    return build_trie(table, vocab);
  } catch (const DataError&) {
    return {};
  }
}

Vocabulary build_vocabulary(std::span<const QaExample> train, const KnowledgeBase* kb) {
  std::vector<std::string> words;
  auto add = [&](std::string_view text) {
    auto tokens = word_tokens(text);
    words.insert(words.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
  };
  for (const auto& ex : train) {
    add(ex.question);
    add(ex.answer);
    for (const auto& p : ex.passages) add(p);
  }
  if (kb) {
    for (const auto& doc : kb->docs()) add(doc.text);
  }
  return Vocabulary::from_words(words);
}

std::vector<TrainingPair> corpus_sentence_pairs(const KnowledgeBase& kb, const Vocabulary& vocab) {
  std::vector<TrainingPair> pairs;
  for (const auto& doc : kb.docs()) {
    std::string sentence;
    auto flush = [&] {
      auto ids = vocab.encode(sentence);
      if (!ids.empty()) pairs.push_back({{}, std::move(ids)});
      sentence.clear();
    };
    for (char c : doc.text) {
      if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
        flush();
      } else {
        sentence.push_back(c);
      }
    }
    flush();
  }
  return pairs;
}

NGramModel train_on_examples(std::span<const QaExample> train, const KnowledgeBase* kb, int order, double k,
                             bool corpus_sentences) {
  auto vocab = build_vocabulary(train, kb);
  std::vector<TrainingPair> pairs;
  pairs.reserve(train.size());
  for (const auto& ex : train) {
    if (trim(ex.answer).empty()) throw DataError("training example '" + ex.id + "' has no answer");
    pairs.push_back({vocab.encode(ex.question), vocab.encode(ex.answer)});
  }
  if (corpus_sentences && kb) {
    auto extra = corpus_sentence_pairs(*kb, vocab);
    pairs.insert(pairs.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  }
  return train_ngram(std::move(vocab), pairs, order, k);
}

ConditioningContext make_context(const Vocabulary& vocab, const QaExample& example,
                                 std::span<const Document> knowledge) {
  ConditioningContext ctx;
  ctx.question = vocab.encode(example.question);
  for (const auto& doc : knowledge) ctx.passages.push_back(vocab.encode(doc.text));
  return ctx;
}

fs::path ExperimentSpec::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

ExperimentSpec ExperimentSpec::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  spec.base_dir = base_dir;
  try {
    spec.corpus = j.value("corpus", std::string{});
    spec.corpus_format = parse_corpus_format(j.value("corpus_format", std::string("jsonl")));
    spec.train = j.at("train").get<std::string>();
    spec.dataset = j.at("dataset").get<std::string>();
    spec.stopwords = j.value("stopwords", std::string{});
    spec.order = j.value("order", spec.order);
    spec.smoothing = j.value("smoothing", spec.smoothing);
    spec.lm_corpus_sentences = j.value("lm_corpus_sentences", spec.lm_corpus_sentences);
    spec.knowledge.retrieve_k = j.value("retrieve_k", spec.knowledge.retrieve_k);
    spec.knowledge.rake_top = j.value("rake_top", spec.knowledge.rake_top);
    spec.knowledge.scope = parse_rake_scope(j.value("rake_scope", std::string("concat")));
    spec.knowledge.max_phrase_words = j.value("max_phrase_words", spec.knowledge.max_phrase_words);
    spec.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    const auto& grid = j.at("grid");
    if (!grid.is_array()) throw ConfigError("experiment \"grid\" must be an array");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      GridRow row;
      row.config = decoder_config_from_json(grid[i]);
      row.label = grid[i].value("label", "row" + std::to_string(i));
      spec.grid.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw ConfigError("experiment grid needs at least one row");
  if (train.empty()) throw ConfigError("experiment needs a training dataset");
  if (dataset.empty()) throw ConfigError("experiment needs an evaluation dataset");
  if (knowledge.retrieve_k == 0) throw ConfigError("retrieve_k must be at least 1");
  if (knowledge.rake_top == 0) throw ConfigError("rake_top must be at least 1");
  for (const auto& row : grid) row.config.validate();
}

ordered_json ExperimentSpec::to_json() const {
  ordered_json j;
  j["corpus"] = corpus;
  j["corpus_format"] = corpus_format == CorpusFormat::jsonl ? "jsonl" : "text_dir";
  j["train"] = train;
  j["dataset"] = dataset;
  j["stopwords"] = stopwords;
  j["order"] = order;
  j["smoothing"] = smoothing;
  j["lm_corpus_sentences"] = lm_corpus_sentences;
  j["retrieve_k"] = knowledge.retrieve_k;
  j["rake_top"] = knowledge.rake_top;
  j["rake_scope"] = rake_scope_name(knowledge.scope);
  j["max_phrase_words"] = knowledge.max_phrase_words;
  j["seeds"] = seeds;
  auto grid_json = ordered_json::array();
  for (const auto& row : grid) {
    ordered_json r;
    r["label"] = row.label;
    r.update(decoder_config_to_json(row.config));
    grid_json.push_back(std::move(r));
  }
  j["grid"] = std::move(grid_json);
  return j;
}

namespace {

struct MetricTotals {
  RougeScore rouge1, rouge2, rouge_l, rouge_lsum;
  double bleu = 0.0;
  std::size_t n = 0;

  void add(const MetricSet& m) {
    auto acc = [](RougeScore& into, const RougeScore& s) {
      into.precision += s.precision;
      into.recall += s.recall;
      into.f1 += s.f1;
    };
    acc(rouge1, m.rouge1);
    acc(rouge2, m.rouge2);
    acc(rouge_l, m.rouge_l);
    acc(rouge_lsum, m.rouge_lsum);
    bleu += m.bleu.bleu;
    ++n;
  }

  ordered_json headline() const {
    ordered_json j;
    const char* names[] = {"rouge1", "rouge2", "rougeL", "rougeLsum"};
    const RougeScore* scores[] = {&rouge1, &rouge2, &rouge_l, &rouge_lsum};
    for (int i = 0; i < 4; ++i) j[names[i]] = n ? ordered_json(scores[i]->f1 / n) : ordered_json(nullptr);
    j["bleu"] = n ? ordered_json(bleu / n) : ordered_json(nullptr);
    return j;
  }

  ordered_json detail() const {
    ordered_json j;
    const char* names[] = {"rouge1", "rouge2", "rougeL", "rougeLsum"};
    const RougeScore* scores[] = {&rouge1, &rouge2, &rouge_l, &rouge_lsum};
    for (int i = 0; i < 4; ++i) {
      j[names[i]] = n ? to_json(RougeScore{scores[i]->precision / n, scores[i]->recall / n, scores[i]->f1 / n})
                      : ordered_json(nullptr);
    }
    return j;
  }
};

struct PreparedQuestion {
  const QaExample* example = nullptr;
  ConditioningContext ctx;
  KeywordTrie trie;
  std::size_t keyword_count = 0;
  std::string error;
};

}  // namespace

ordered_json run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::optional<KnowledgeBase> kb;
  if (!spec.corpus.empty()) kb = ingest_corpus(spec.resolve(spec.corpus), spec.corpus_format);
  const auto stops = spec.stopwords.empty() ? StopwordSet::english() : StopwordSet::load(spec.resolve(spec.stopwords));
  const auto train = load_dataset(spec.resolve(spec.train));
  auto eval = load_dataset(spec.resolve(spec.dataset));
  std::stable_sort(eval.begin(), eval.end(), [](const QaExample& a, const QaExample& b) { return a.id < b.id; });

  const auto model = train_on_examples(train, kb ? &*kb : nullptr, spec.order, spec.smoothing, spec.lm_corpus_sentences);

  std::vector<PreparedQuestion> prepared;
  prepared.reserve(eval.size());
  for (const auto& ex : eval) {
    PreparedQuestion q;
    q.example = &ex;
    try {
      const auto knowledge = gather_knowledge(kb ? &*kb : nullptr, ex, spec.knowledge);
      q.ctx = make_context(model.vocab(), ex, knowledge);
      const auto table = knowledge_table(knowledge, stops, spec.knowledge);
      q.keyword_count = table.size();
      q.trie = knowledge_trie(table, model.vocab());
    } catch (const std::exception& e) {
      q.error = e.what();
    }
    prepared.push_back(std::move(q));
  }

  ordered_json report;
  report["experiment"] = spec.to_json();
  report["omitted_metrics"] = {"bertscore", "bartscore"};
  auto rows = ordered_json::array();
  auto errors = ordered_json::array();

  for (std::size_t r = 0; r < spec.grid.size(); ++r) {
    const auto& row = spec.grid[r];
    const auto seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{row.config.seed} : spec.seeds;
    MetricTotals totals;
    auto examples = ordered_json::array();
    for (const auto& q : prepared) {
      for (auto seed : seeds) {
        auto record_error = [&](const std::string& message) {
          ordered_json e;
          e["row"] = r;
          e["id"] = q.example->id;
          e["seed"] = seed;
          e["message"] = message;
          errors.push_back(std::move(e));
        };
        if (!q.error.empty()) {
          record_error(q.error);
          continue;
        }
        try {
          auto config = row.config;
          config.seed = seed;
          const auto answer = generate(model, q.trie, q.ctx, config);
          const auto scores = score_answer(answer.text, q.example->answer);
          totals.add(scores);
          ordered_json e;
          e["id"] = q.example->id;
          e["seed"] = seed;
          e["keywords"] = q.keyword_count;
          e["answer"] = answer.text;
          e["reference"] = q.example->answer;
          e["total_logprob"] = answer.total_logprob;
          e["scores"] = to_json(scores);
          examples.push_back(std::move(e));
        } catch (const std::exception& ex) {
          record_error(ex.what());
        }
      }
    }
    ordered_json row_json;
    row_json["index"] = r;
    row_json["label"] = row.label;
    row_json["config"] = decoder_config_to_json(row.config);
    row_json["seeds"] = seeds;
    row_json["scored"] = totals.n;
    row_json["mean"] = totals.headline();
    row_json["mean_detail"] = totals.detail();
    row_json["examples"] = std::move(examples);
    rows.push_back(std::move(row_json));
  }
  report["rows"] = std::move(rows);
  report["errors"] = std::move(errors);
  return report;
}

}  // namespace keys
