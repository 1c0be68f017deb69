// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "keys/corpus.hpp"
#include "keys/decode.hpp"
#include "keys/error.hpp"
#include "keys/experiment.hpp"
#include "keys/keyword_table.hpp"
#include "keys/lang_model.hpp"
#include "keys/metrics.hpp"
#include "keys/rake.hpp"
#include "keys/text.hpp"

namespace keys::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct KnowledgeFlags {
  std::string corpus;
  std::string format = "jsonl";
  std::string stopwords;
  std::size_t retrieve_k = 5;
  std::size_t rake_top = 20;
  std::string rake_scope = "concat";
  std::size_t max_words = kDefaultMaxPhraseWords;

  void add_corpus(CLI::App* app) {
    app->add_option("--corpus", corpus, "Knowledge corpus (JSONL file or directory of .txt files)");
    app->add_option("--format", format, "Corpus format")->check(CLI::IsMember({"jsonl", "text_dir"}));
  }

  void add_extraction(CLI::App* app) {
    app->add_option("--stopwords", stopwords, "Stopword file (default: bundled SMART list)");
    app->add_option("--retrieve-k", retrieve_k, "Passages retrieved per question")->check(CLI::PositiveNumber);
    app->add_option("--rake-top", rake_top, "Keywords kept from RAKE")->check(CLI::PositiveNumber);
    app->add_option("--rake-scope", rake_scope, "Run RAKE per document or over the concatenation")
        ->check(CLI::IsMember({"concat", "per_doc"}));
    app->add_option("--max-words", max_words, "Longest candidate phrase, in words")->check(CLI::PositiveNumber);
  }

  std::optional<KnowledgeBase> load_kb() const {
    if (corpus.empty()) return std::nullopt;
    return ingest_corpus(corpus, parse_corpus_format(format));
  }

  StopwordSet stops() const { return stopwords.empty() ? StopwordSet::english() : StopwordSet::load(stopwords); }

  KnowledgeOptions options() const {
    KnowledgeOptions o;
    o.retrieve_k = retrieve_k;
    o.rake_top = rake_top;
    o.scope = parse_rake_scope(rake_scope);
    o.max_phrase_words = max_words;
    return o;
  }
};

struct DecoderFlags {
  std::string config_file;
  std::string strategy;
  double tau = 1.0;
  std::size_t topk = 40;
  double topp = 0.9;
  std::size_t beam = 4;
  double lambda = 0.0;
  double mu = 0.0;
  std::string boost_form = "promoted";
  std::size_t min_len = 0;
  std::size_t max_len = 32;
  std::uint64_t seed = 0;
  bool trace = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_file, "Decoder config JSON");
    opts["strategy"] = app->add_option("--strategy", strategy, "greedy|temperature|topk|topp|beam")
                           ->check(CLI::IsMember({"greedy", "temperature", "topk", "topp", "beam"}));
    opts["tau"] = app->add_option("--tau", tau, "Temperature");
    opts["topk"] = app->add_option("--topk", topk, "Top-k size");
    opts["topp"] = app->add_option("--topp", topp, "Nucleus mass");
    opts["beam"] = app->add_option("--beam", beam, "Beam width");
    opts["lambda"] = app->add_option("--lambda", lambda, "Keyword weight");
    opts["mu"] = app->add_option("--mu", mu, "Keyword/history overlap weight");
    opts["boost_form"] = app->add_option("--boost-form", boost_form, "promoted|literal")
                             ->check(CLI::IsMember({"promoted", "literal"}));
    opts["min_len"] = app->add_option("--min-len", min_len, "Minimum answer length");
    opts["max_len"] = app->add_option("--max-len", max_len, "Maximum answer length");
    opts["seed"] = app->add_option("--seed", seed, "Random seed");
    opts["trace"] = app->add_flag("--trace", trace, "Record per-step traces");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  // Defaults, then the config file, then explicit flags.
  DecoderConfig build() const {
    DecoderConfig config;
    if (!config_file.empty()) config = decoder_config_from_json(json::parse(read_file(config_file)));
    json j = decoder_config_to_json(config);
    if (given("strategy")) j["strategy"] = strategy;
    if (given("tau")) j["tau"] = tau;
    if (given("topk")) j["k"] = topk;
    if (given("topp")) j["p"] = topp;
    if (given("beam")) j["width"] = beam;
    if (given("lambda")) j["lambda"] = lambda;
    if (given("mu")) j["mu"] = mu;
    if (given("boost_form")) j["boost_form"] = boost_form;
    if (given("min_len")) j["min_len"] = min_len;
    if (given("max_len")) j["max_len"] = max_len;
    if (given("seed")) j["seed"] = seed;
    j["trace"] = trace || config.trace;
    return decoder_config_from_json(j, config);
  }
};

// Writes to --out when set, otherwise to the command's stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot write " + path);
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keyword-based sampling (KEYS) toolkit"};
  app.require_subcommand(1);
  std::string out_path;

  // ingest
  KnowledgeFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write it as normalized JSONL");
  ingest_flags.add_corpus(ingest);
  ingest->get_option("--corpus")->required();
  ingest->add_option("--out", out_path, "Output file");

  // keywords
  KnowledgeFlags kw_flags;
  std::string kw_question;
  std::string kw_text;
  auto* keywords = app.add_subcommand("keywords", "Extract RAKE keywords from retrieved passages or a text file");
  kw_flags.add_corpus(keywords);
  kw_flags.add_extraction(keywords);
  keywords->add_option("--question", kw_question, "Retrieve passages for this question from --corpus");
  keywords->add_option("--text", kw_text, "Extract from this text file instead");
  keywords->add_option("--out", out_path, "Output file");

  // table
  KnowledgeFlags table_flags;
  std::string table_keywords;
  std::string table_question;
  auto* table = app.add_subcommand("table", "Count keywords in the corpus and build the normalized table");
  table_flags.add_corpus(table);
  table->get_option("--corpus")->required();
  table->add_option("--keywords", table_keywords, "Keyword JSON from the keywords command")->required();
  table->add_option("--question", table_question, "Count only in passages retrieved for this question");
  table->add_option("--retrieve-k", table_flags.retrieve_k, "Passages retrieved for --question")
      ->check(CLI::PositiveNumber);
  table->add_option("--out", out_path, "Output file");

  // train
  KnowledgeFlags train_flags;
  std::string train_data;
  int train_order = 3;
  double train_k = 0.1;
  auto* train = app.add_subcommand("train", "Train the reference n-gram language model");
  train_flags.add_corpus(train);
  train->add_option("--data", train_data, "Question/answer JSONL")->required();
  train->add_option("--order", train_order, "n-gram order")->check(CLI::Range(1, 5));
  train->add_option("--smoothing", train_k, "Add-k constant")->check(CLI::PositiveNumber);
  train->add_option("--out", out_path, "Model file")->required();

  // generate
  KnowledgeFlags gen_flags;
  DecoderFlags dec_flags;
  std::string gen_model;
  std::string gen_data;
  std::string gen_table;
  auto* gen = app.add_subcommand("generate", "Generate answers with optional keyword boosting");
  gen_flags.add_corpus(gen);
  gen_flags.add_extraction(gen);
  dec_flags.add(gen);
  gen->add_option("--model", gen_model, "Model file from the train command")->required();
  gen->add_option("--data", gen_data, "Questions JSONL")->required();
  gen->add_option("--table", gen_table, "Fixed keyword table for every question (skips retrieval)");
  gen->add_option("--out", out_path, "Answers JSONL");

  // evaluate
  std::string eval_answers;
  std::string eval_data;
  auto* evaluate = app.add_subcommand("evaluate", "Score generated answers against references");
  evaluate->add_option("--answers", eval_answers, "Answers JSONL from the generate command")->required();
  evaluate->add_option("--data", eval_data, "Reference JSONL with id and answer")->required();
  evaluate->add_option("--out", out_path, "Report file");

  // experiment
  std::string exp_spec;
  auto* experiment = app.add_subcommand("experiment", "Run a decoding-strategy grid and report mean scores");
  experiment->add_option("--spec", exp_spec, "Experiment spec JSON")->required();
  experiment->add_option("--out", out_path, "Report file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      auto kb = ingest_flags.load_kb();
      Output o(out_path, out);
      write_corpus_jsonl(*kb, *o);
      err << "ingested " << kb->total_docs() << " documents\n";
    } else if (keywords->parsed()) {
      std::vector<Document> docs;
      if (!kw_text.empty()) {
        docs.push_back({"text", read_file(kw_text), kw_text});
      } else if (!kw_question.empty()) {
        auto kb = kw_flags.load_kb();
        if (!kb) throw ConfigError("--question needs --corpus");
        docs = gather_knowledge(&*kb, QaExample{"query", kw_question, "", {}}, kw_flags.options());
      } else {
        throw ConfigError("keywords needs --text or --question");
      }
      const auto stops = kw_flags.stops();
      const auto options = kw_flags.options();
      std::vector<ScoredKeyword> scored;
      if (options.scope == RakeScope::concat) {
        std::string text;
        for (const auto& d : docs) text += d.text + "\n.\n";
        scored = rake(text, stops, options.rake_top, options.max_phrase_words);
      } else {
        for (const auto& d : docs) {
          auto part = rake(d.text, stops, options.rake_top, options.max_phrase_words);
          scored.insert(scored.end(), part.begin(), part.end());
        }
      }
      Output o(out_path, out);
      *o << keywords_to_json(scored).dump(2) << '\n';
    } else if (table->parsed()) {
      auto kb = table_flags.load_kb();
      std::vector<Phrase> phrases;
      for (auto& kw : keywords_from_json(read_json(table_keywords))) phrases.push_back(std::move(kw.phrase));
      std::vector<Document> docs;
      if (table_question.empty()) {
        docs = kb->docs();
      } else {
        docs = gather_knowledge(&*kb, QaExample{"query", table_question, "", {}}, table_flags.options());
      }
      const auto built = build_table(count_keywords(phrases, docs));
      Output o(out_path, out);
      *o << built.to_json().dump(2) << '\n';
    } else if (train->parsed()) {
      auto kb = train_flags.load_kb();
      const auto examples = load_dataset(train_data);
      const auto model = train_on_examples(examples, kb ? &*kb : nullptr, train_order, train_k);
      Output o(out_path, out);
      model.save(*o);
      err << "trained order-" << train_order << " model, vocabulary " << model.vocab().size() << "\n";
    } else if (gen->parsed()) {
      const auto config = dec_flags.build();
      std::ifstream model_in(gen_model);
      if (!model_in) throw DataError("cannot open model " + gen_model);
      const auto model = NGramModel::load(model_in);
      const auto questions = load_dataset(gen_data);
      auto kb = gen_flags.load_kb();
      const auto stops = gen_flags.stops();
      std::optional<KeywordTrie> fixed_trie;
      if (!gen_table.empty()) {
        std::vector<std::string> dropped;
        fixed_trie = build_trie(KeywordTable::from_json(read_json(gen_table)), model.vocab(), &dropped);
        for (const auto& d : dropped) err << "warning: keyword '" << d << "' is out of vocabulary, dropped\n";
      }
      Output o(out_path, out);
      int failures = 0;
      for (const auto& q : questions) {
        try {
          const auto knowledge = gather_knowledge(kb ? &*kb : nullptr, q, gen_flags.options());
          const auto ctx = make_context(model.vocab(), q, knowledge);
          const auto trie =
              fixed_trie ? *fixed_trie : knowledge_trie(knowledge_table(knowledge, stops, gen_flags.options()),
                                                        model.vocab());
          const auto answer = generate(model, trie, ctx, config);
          ordered_json rec;
          rec["id"] = q.id;
          rec["question"] = q.question;
          rec["answer"] = answer.text;
          auto tokens = ordered_json::array();
          for (auto t : answer.tokens) tokens.push_back(model.vocab().token(t));
          rec["tokens"] = std::move(tokens);
          rec["total_logprob"] = answer.total_logprob;
          rec["config"] = decoder_config_to_json(config);
          if (config.trace) rec["trace"] = trace_to_json(answer.trace, model.vocab());
          *o << rec.dump() << '\n';
        } catch (const std::exception& e) {
          err << "question " << q.id << ": " << e.what() << '\n';
          ++failures;
        }
      }
      (*o).flush();
      if (failures > 0) return kExitData;
    } else if (evaluate->parsed()) {
      const auto refs = load_dataset(eval_data);
      std::map<std::string, const QaExample*> by_id;
      for (const auto& r : refs) by_id.emplace(r.id, &r);
      std::ifstream in(eval_answers);
      if (!in) throw DataError("cannot open " + eval_answers);
      std::vector<std::pair<std::string, MetricSet>> scored;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
          rec = json::parse(line);
        } catch (const json::parse_error& e) {
          throw DataError(eval_answers + ":" + std::to_string(line_no) + ": malformed JSON line");
        }
        const auto id = rec.value("id", std::string{});
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          throw DataError(eval_answers + ":" + std::to_string(line_no) + ": no reference for id '" + id + "'");
        }
        scored.emplace_back(id, score_answer(rec.value("answer", std::string{}), it->second->answer));
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      ordered_json report;
      ordered_json mean;
      const double n = static_cast<double>(scored.size());
      auto mean_of = [&](auto field) {
        if (scored.empty()) return ordered_json(nullptr);
        double total = 0.0;
        for (const auto& [id, m] : scored) total += field(m);
        return ordered_json(total / n);
      };
      mean["rouge1"] = mean_of([](const MetricSet& m) { return m.rouge1.f1; });
      mean["rouge2"] = mean_of([](const MetricSet& m) { return m.rouge2.f1; });
      mean["rougeL"] = mean_of([](const MetricSet& m) { return m.rouge_l.f1; });
      mean["rougeLsum"] = mean_of([](const MetricSet& m) { return m.rouge_lsum.f1; });
      mean["bleu"] = mean_of([](const MetricSet& m) { return m.bleu.bleu; });
      report["count"] = scored.size();
      report["mean"] = std::move(mean);
      report["omitted_metrics"] = {"bertscore", "bartscore"};
      auto examples = ordered_json::array();
      for (const auto& [id, m] : scored) {
        ordered_json e;
        e["id"] = id;
        e["scores"] = to_json(m);
        examples.push_back(std::move(e));
      }
      report["examples"] = std::move(examples);
      Output o(out_path, out);
      *o << report.dump(2) << '\n';
    } else if (experiment->parsed()) {
      const auto spec = ExperimentSpec::from_json(read_json(exp_spec), fs::path(exp_spec).parent_path());
      const auto report = run_experiment(spec);
      Output o(out_path, out);
      *o << report.dump(2) << '\n';
      (*o).flush();
      if (!report["errors"].empty()) {
        err << report["errors"].size() << " question(s) failed; see \"errors\" in the report\n";
        return kExitData;
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace keys::cli
