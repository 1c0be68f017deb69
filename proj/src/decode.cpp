// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include "keys/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "keys/error.hpp"

namespace keys {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Ids sorted by descending probability, ties by ascending id.
std::vector<TokenId> ranked_ids(const NextTokenDistribution& dist) {
  std::vector<TokenId> ids(dist.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) { return dist[a] > dist[b]; });
  return ids;
}

}  // namespace

std::string strategy_name(const Strategy& strategy) {
  return std::visit(overloaded{[](const Greedy&) { return std::string("greedy"); },
                               [](const Temperature&) { return std::string("temperature"); },
                               [](const TopK&) { return std::string("topk"); },
                               [](const TopP&) { return std::string("topp"); },
                               [](const Beam&) { return std::string("beam"); }},
                    strategy);
}

BoostForm parse_boost_form(std::string_view name) {
  if (name == "promoted") return BoostForm::promoted;
  if (name == "literal") return BoostForm::literal;
  throw ConfigError("unknown boost form '" + std::string(name) + "' (expected promoted or literal)");
}

std::string_view boost_form_name(BoostForm form) {
  return form == BoostForm::promoted ? "promoted" : "literal";
}

void DecoderConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(lambda)) throw ConfigError("lambda must be a finite value >= 0");
  if (!finite_nonneg(mu)) throw ConfigError("mu must be a finite value >= 0");
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  if (min_len > max_len) throw ConfigError("min_len must not exceed max_len");
  std::visit(overloaded{[](const Greedy&) {},
                        [](const Temperature& t) {
                          if (!(t.tau > 0.0) || !std::isfinite(t.tau)) throw ConfigError("temperature tau must be > 0");
                        },
                        [](const TopK& t) {
                          if (t.k == 0) throw ConfigError("top-k k must be at least 1");
                        },
                        [](const TopP& t) {
                          if (!(t.p > 0.0 && t.p <= 1.0)) throw ConfigError("top-p p must be in (0, 1]");
                        },
                        [](const Beam& b) {
                          if (b.width == 0) throw ConfigError("beam width must be at least 1");
                        }},
             strategy);
}

nlohmann::ordered_json decoder_config_to_json(const DecoderConfig& config) {
  nlohmann::ordered_json j;
  j["strategy"] = strategy_name(config.strategy);
  std::visit(overloaded{[](const Greedy&) {}, [&](const Temperature& t) { j["tau"] = t.tau; },
                        [&](const TopK& t) { j["k"] = t.k; }, [&](const TopP& t) { j["p"] = t.p; },
                        [&](const Beam& b) { j["width"] = b.width; }},
             config.strategy);
  j["lambda"] = config.lambda;
  j["mu"] = config.mu;
  j["boost_form"] = boost_form_name(config.boost_form);
  j["min_len"] = config.min_len;
  j["max_len"] = config.max_len;
  j["seed"] = config.seed;
  return j;
}

DecoderConfig decoder_config_from_json(const nlohmann::json& j, DecoderConfig base) {
  if (!j.is_object()) throw ConfigError("decoder config must be a JSON object");
  try {
    auto name = j.value("strategy", strategy_name(base.strategy));
    if (name == "greedy") {
      base.strategy = Greedy{};
    } else if (name == "temperature" || name == "temp") {
      base.strategy = Temperature{j.value("tau", 1.0)};
    } else if (name == "topk") {
      base.strategy = TopK{j.value("k", std::size_t{40})};
    } else if (name == "topp") {
      base.strategy = TopP{j.value("p", 0.9)};
    } else if (name == "beam") {
      base.strategy = Beam{j.value("width", std::size_t{4})};
    } else {
      throw ConfigError("unknown strategy '" + name + "'");
    }
    base.lambda = j.value("lambda", base.lambda);
    base.mu = j.value("mu", base.mu);
    if (j.contains("boost_form")) base.boost_form = parse_boost_form(j["boost_form"].get<std::string>());
    base.min_len = j.value("min_len", base.min_len);
    base.max_len = j.value("max_len", base.max_len);
    base.seed = j.value("seed", base.seed);
    base.trace = j.value("trace", base.trace);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid decoder config: ") + e.what());
  }
  base.validate();
  return base;
}

std::vector<std::size_t> MatchState::depths() const {
  std::vector<std::size_t> out;
  out.reserve(active.size());
  for (const auto& m : active) out.push_back(m.depth);
  return out;
}

std::vector<double> keyword_bonus(std::size_t vocab_size, const MatchState& state, const KeywordTrie& trie,
                                  double mu) {
  std::vector<double> bonus(vocab_size, 0.0);
  auto visit_children = [&](KeywordTrie::NodeId parent, double factor) {
    for (const auto& [token, child] : trie.node(parent).children) {
      if (token >= vocab_size || Vocabulary::is_reserved(token)) continue;
      bonus[token] = std::max(bonus[token], trie.node(child).max_alpha * factor);
    }
  };
  visit_children(KeywordTrie::kRoot, 1.0);
  for (const auto& match : state.active) {
    visit_children(match.node, 1.0 + mu * static_cast<double>(match.depth));
  }
  return bonus;
}

NextTokenDistribution keys_boost(const NextTokenDistribution& dist, const MatchState& state,
                                 const KeywordTrie& trie, double lambda, double mu, BoostForm form) {
  if (lambda == 0.0 || trie.empty()) return dist;
  const auto bonus = keyword_bonus(dist.size(), state, trie, mu);
  if (std::none_of(bonus.begin(), bonus.end(), [](double b) { return b > 0.0; })) return dist;

  NextTokenDistribution out = dist;
  for (TokenId x = 0; x < out.size(); ++x) {
    if (bonus[x] <= 0.0) continue;
    out[x] *= form == BoostForm::promoted ? 1.0 + lambda * bonus[x] : bonus[x];
  }
  out.normalize();
  return out;
}

MatchState advance_matches(const MatchState& state, TokenId chosen, const KeywordTrie& trie) {
  MatchState next;
  for (const auto& match : state.active) {
    auto child = trie.child(match.node, chosen);
    if (child && !trie.node(*child).children.empty()) next.active.push_back({*child, match.depth + 1});
  }
  auto start = trie.child(KeywordTrie::kRoot, chosen);
  if (start && !trie.node(*start).children.empty()) next.active.push_back({*start, 1});
  return next;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

TokenId argmax(const NextTokenDistribution& dist) {
  if (dist.size() == 0) throw ConfigError("argmax of an empty distribution");
  TokenId best = 0;
  for (TokenId i = 1; i < dist.size(); ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return best;
}

std::vector<TokenId> candidate_set(const NextTokenDistribution& dist, const Strategy& strategy) {
  std::vector<TokenId> out;
  std::visit(overloaded{[&](const Greedy&) { out.push_back(argmax(dist)); },
                        [&](const Beam&) { out.push_back(argmax(dist)); },
                        [&](const Temperature&) {
                          for (TokenId i = 0; i < dist.size(); ++i) {
                            if (dist[i] > 0.0) out.push_back(i);
                          }
                        },
                        [&](const TopK& t) {
                          for (auto id : ranked_ids(dist)) {
                            if (out.size() == t.k || dist[id] <= 0.0) break;
                            out.push_back(id);
                          }
                        },
                        [&](const TopP& t) {
                          double cumulative = 0.0;
                          for (auto id : ranked_ids(dist)) {
                            if (dist[id] <= 0.0) break;
                            out.push_back(id);
                            cumulative += dist[id];
                            if (cumulative + 1e-12 >= t.p) break;
                          }
                        }},
             strategy);
  std::sort(out.begin(), out.end());
  return out;
}

NextTokenDistribution strategy_distribution(const NextTokenDistribution& dist, const Strategy& strategy) {
  std::vector<double> probs(dist.size(), 0.0);
  const auto candidates = candidate_set(dist, strategy);
  if (const auto* t = std::get_if<Temperature>(&strategy)) {
    double log_max = -std::numeric_limits<double>::infinity();
    for (auto id : candidates) log_max = std::max(log_max, std::log(dist[id]));
    for (auto id : candidates) probs[id] = std::exp((std::log(dist[id]) - log_max) / t->tau);
  } else if (std::holds_alternative<Greedy>(strategy) || std::holds_alternative<Beam>(strategy)) {
    probs[candidates.front()] = 1.0;
  } else {
    for (auto id : candidates) probs[id] = dist[id];
  }
  NextTokenDistribution out(std::move(probs));
  out.normalize();
  return out;
}

TokenId apply_strategy(const NextTokenDistribution& dist, const Strategy& strategy, Rng& rng) {
  if (std::holds_alternative<Beam>(strategy)) throw ConfigError("beam search is run by generate_beam");
  if (std::holds_alternative<Greedy>(strategy)) return argmax(dist);

  const auto sampling = strategy_distribution(dist, strategy);
  const double u = uniform01(rng);
  double cumulative = 0.0;
  TokenId last = 0;
  for (TokenId i = 0; i < sampling.size(); ++i) {
    if (sampling[i] <= 0.0) continue;
    cumulative += sampling[i];
    last = i;
    if (u < cumulative) return i;
  }
  return last;
}

void mask_for_step(NextTokenDistribution& dist, std::size_t step, std::size_t min_len) {
  bool changed = false;
  auto zero = [&](TokenId id) {
    if (id < dist.size() && dist[id] != 0.0) {
      dist[id] = 0.0;
      changed = true;
    }
  };
  zero(Vocabulary::kBos);
  zero(Vocabulary::kSep);
  zero(Vocabulary::kUnk);
  if (step < min_len) zero(Vocabulary::kEos);
  if (changed) dist.normalize();
}

std::vector<TokenProb> top_tokens(const NextTokenDistribution& dist, std::size_t n) {
  std::vector<TokenProb> out;
  for (auto id : ranked_ids(dist)) {
    if (out.size() == n) break;
    out.push_back({id, dist[id]});
  }
  return out;
}

namespace {

// Pre/post distributions for one decoding step from one history.
NextTokenDistribution step_distribution(const LanguageModel& lm, const KeywordTrie& trie,
                                        const ConditioningContext& ctx, const DecoderConfig& config,
                                        const std::vector<TokenId>& history, const MatchState& state,
                                        NextTokenDistribution* pre_out) {
  auto pre = lm.next_dist(history, ctx);
  if (pre.size() != lm.vocab().size()) throw DataError("language model returned a distribution of the wrong size");
  auto post = keys_boost(pre, state, trie, config.lambda, config.mu, config.boost_form);
  mask_for_step(post, history.size(), config.min_len);
  if (pre_out) *pre_out = std::move(pre);
  return post;
}

}  // namespace

GeneratedAnswer generate(const LanguageModel& lm, const KeywordTrie& trie, const ConditioningContext& ctx,
                         const DecoderConfig& config) {
  config.validate();
  if (std::holds_alternative<Beam>(config.strategy)) return generate_beam(lm, trie, ctx, config);

  GeneratedAnswer answer;
  Rng rng(config.seed);
  MatchState state;
  NextTokenDistribution pre;
  for (std::size_t step = 0; step < config.max_len; ++step) {
    auto post = step_distribution(lm, trie, ctx, config, answer.tokens, state, config.trace ? &pre : nullptr);
    const TokenId chosen = apply_strategy(post, config.strategy, rng);
    answer.total_logprob += std::log(post[chosen]);
    if (config.trace) {
      answer.trace.push_back({step, top_tokens(pre), top_tokens(post), chosen, state.depths()});
    }
    if (chosen == Vocabulary::kEos) break;
    answer.tokens.push_back(chosen);
    state = advance_matches(state, chosen, trie);
  }
  answer.text = lm.vocab().decode(answer.tokens);
  return answer;
}

namespace {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  MatchState state;
  std::vector<StepTrace> trace;
};

struct Candidate {
  std::size_t parent = 0;
  TokenId token = 0;
  double logprob = 0.0;
};

// Higher score first; equal scores prefer the lexicographically smaller
// sequence.
bool better(double score_a, const std::vector<TokenId>& a, double score_b, const std::vector<TokenId>& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

GeneratedAnswer generate_beam(const LanguageModel& lm, const KeywordTrie& trie, const ConditioningContext& ctx,
                              const DecoderConfig& config) {
  config.validate();
  const auto* beam = std::get_if<Beam>(&config.strategy);
  if (!beam) throw ConfigError("generate_beam requires the beam strategy");
  const std::size_t width = beam->width;

  std::vector<Hypothesis> alive(1);
  std::vector<Hypothesis> finished;

  auto sequence_of = [&](const Candidate& c) {
    auto seq = alive[c.parent].tokens;
    if (c.token != Vocabulary::kEos) seq.push_back(c.token);
    return seq;
  };

  for (std::size_t step = 0; step < config.max_len; ++step) {
    std::vector<Candidate> candidates;
    std::vector<StepTrace> step_traces(alive.size());
    for (std::size_t h = 0; h < alive.size(); ++h) {
      NextTokenDistribution pre;
      auto post = step_distribution(lm, trie, ctx, config, alive[h].tokens, alive[h].state,
                                    config.trace ? &pre : nullptr);
      if (config.trace) step_traces[h] = {step, top_tokens(pre), top_tokens(post), 0, alive[h].state.depths()};
      for (TokenId t = 0; t < post.size(); ++t) {
        if (post[t] > 0.0) candidates.push_back({h, t, alive[h].logprob + std::log(post[t])});
      }
    }

    const auto cmp = [&](const Candidate& a, const Candidate& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      return better(a.logprob, sequence_of(a), b.logprob, sequence_of(b));
    };
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      cmp);
    candidates.resize(keep);

    std::vector<Hypothesis> next_alive;
    for (const auto& c : candidates) {
      const auto& parent = alive[c.parent];
      Hypothesis hyp{parent.tokens, c.logprob, {}, config.trace ? parent.trace : std::vector<StepTrace>{}};
      if (config.trace) {
        hyp.trace.push_back(step_traces[c.parent]);
        hyp.trace.back().chosen = c.token;
      }
      if (c.token == Vocabulary::kEos) {
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(c.token);
        hyp.state = advance_matches(parent.state, c.token, trie);
        next_alive.push_back(std::move(hyp));
      }
    }
    alive = std::move(next_alive);
    if (alive.empty()) break;

    // Scores never increase, so a finished hypothesis strictly ahead of every
    // live one cannot be overtaken.
    if (!finished.empty()) {
      double best_finished = -std::numeric_limits<double>::infinity();
      for (const auto& f : finished) best_finished = std::max(best_finished, f.logprob);
      if (best_finished > alive.front().logprob) break;
    }
  }
  for (auto& hyp : alive) finished.push_back(std::move(hyp));

  auto best = std::min_element(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return better(a.logprob, a.tokens, b.logprob, b.tokens);
  });
  GeneratedAnswer answer;
  answer.tokens = std::move(best->tokens);
  answer.total_logprob = best->logprob;
  answer.trace = std::move(best->trace);
  answer.text = lm.vocab().decode(answer.tokens);
  return answer;
}

nlohmann::ordered_json trace_to_json(const std::vector<StepTrace>& trace, const Vocabulary& vocab) {
  auto summary = [&](const std::vector<TokenProb>& entries) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) arr.push_back({vocab.token(e.token), e.prob});
    return arr;
  };
  auto out = nlohmann::ordered_json::array();
  for (const auto& s : trace) {
    nlohmann::ordered_json j;
    j["step"] = s.step;
    j["pre"] = summary(s.pre_boost);
    j["post"] = summary(s.post_boost);
    j["chosen"] = vocab.token(s.chosen);
    j["match_depths"] = s.match_depths;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace keys
