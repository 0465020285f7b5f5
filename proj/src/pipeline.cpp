#include "causalgen/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "causalgen/text.hpp"

namespace causalgen {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(CausalDirection d) {
  return d == CausalDirection::Cause ? "cause" : "effect";
}

namespace {

std::string render_tokens(const std::vector<TokenId>& tokens, const Vocabulary& vocab) {
  std::string out;
  for (TokenId t : tokens) {
    if (t == Vocabulary::kBos || t == Vocabulary::kEos || t == Vocabulary::kUnk) continue;
    if (!out.empty()) out += ' ';
    out += vocab.token(t);
  }
  return out;
}

double hypothesis_nll(const Hypothesis& h, bool length_normalize) {
  double nll = -h.log_prob;
  if (length_normalize && !h.tokens.empty())
    nll /= static_cast<double>(h.tokens.size());
  return nll;
}

void validate(const GenerationConfig& config) {
  if (config.n_constraints < 1) throw std::invalid_argument("n_constraints must be >= 1");
  if (config.per_constraint_keep < 1)
    throw std::invalid_argument("per_constraint_keep must be >= 1");
  if (config.final_k < 1) throw std::invalid_argument("final_k must be >= 1");
  if (config.final_k > config.n_constraints * config.per_constraint_keep)
    throw std::invalid_argument("final_k must be <= n_constraints * per_constraint_keep");
}

}  // namespace

GenerationResult generate(const std::string& input_sentence, const CauseEffectGraph& graph,
                          const TokenScorer& scorer, const Lexicon& lexicon,
                          const GenerationConfig& config) {
  validate(config);

  GenerationResult result;
  result.input = input_sentence;
  result.direction = config.direction;

  std::set<std::string> input_lemmas;
  for (const Token& t : tokenize(input_sentence)) {
    if (t.is_punct) continue;
    input_lemmas.insert(lexicon.lemmatize(t.lower));
  }
  if (input_lemmas.empty()) throw std::invalid_argument("generate: empty input sentence");

  const GraphDirection query_dir = config.direction == CausalDirection::Cause
                                       ? GraphDirection::CauseOf
                                       : GraphDirection::EffectOf;
  std::vector<WeightedLemma> candidates =
      query_candidates(graph, input_lemmas, query_dir, config.n_constraints);

  if (candidates.empty()) {
    // no graph hits: unconstrained decode, marked as fallback
    result.fallback = true;
    DecodeResult decoded = nbest_decode(scorer, config.beam_size, config.k_max);
    for (const Hypothesis& h : decoded.hypotheses) {
      if (result.outputs.size() >= config.final_k) break;
      GeneratedOutput out;
      out.text = render_tokens(h.tokens, scorer.vocab());
      out.nll = hypothesis_nll(h, config.length_normalize);
      out.satisfied = true;
      out.fallback = true;
      result.outputs.push_back(std::move(out));
    }
    return result;
  }

  // expand variants and drop lemmas with no in-vocabulary variant
  struct Task {
    std::string lemma;
    DisjunctiveConstraintSet set;
  };
  std::vector<Task> tasks;
  for (const WeightedLemma& cand : candidates) {
    DisjunctiveConstraintSet set;
    set.set_id = 0;
    for (const std::string& variant : lexicon.variants(cand.lemma)) {
      if (!scorer.vocab().contains(variant)) continue;
      set.sequences.push_back({scorer.vocab().id_or_unk(variant)});
    }
    if (set.sequences.empty()) {
      result.skipped_unk_lemmas++;
      continue;
    }
    tasks.push_back(Task{cand.lemma, std::move(set)});
  }

  // one DPC search per constraint lemma; slot-per-task keeps the merge
  // order independent of scheduling
  std::vector<std::vector<Hypothesis>> kept(tasks.size());
  unsigned threads = config.threads == 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : config.threads;
  threads = std::min<unsigned>(threads, 64);
  auto worker = [&](unsigned tid) {
    for (std::size_t i = tid; i < tasks.size(); i += threads) {
      std::span<const DisjunctiveConstraintSet> one(&tasks[i].set, 1);
      DecodeResult decoded =
          constrained_beam_search(scorer, one, config.beam_size, config.k_max);
      for (const Hypothesis& h : decoded.hypotheses) {
        if (!h.satisfied) break;
        kept[i].push_back(h);
        if (kept[i].size() >= config.per_constraint_keep) break;
      }
    }
  };
  if (threads <= 1 || tasks.size() <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  // merge: dedup exact strings keeping the lower NLL, then rank
  std::map<std::string, GeneratedOutput> by_text;
  for (std::size_t i = 0; i < tasks.size(); i++) {
    for (const Hypothesis& h : kept[i]) {
      GeneratedOutput out;
      out.text = render_tokens(h.tokens, scorer.vocab());
      out.nll = hypothesis_nll(h, config.length_normalize);
      out.constraint = tasks[i].lemma;
      out.satisfied = true;
      auto it = by_text.find(out.text);
      if (it == by_text.end())
        by_text.emplace(out.text, std::move(out));
      else if (out.nll < it->second.nll)
        it->second = std::move(out);
    }
  }
  for (auto& [text, out] : by_text) result.outputs.push_back(std::move(out));
  std::sort(result.outputs.begin(), result.outputs.end(),
            [](const GeneratedOutput& a, const GeneratedOutput& b) {
              if (a.nll != b.nll) return a.nll < b.nll;
              return a.text < b.text;
            });
  if (result.outputs.size() > config.final_k) result.outputs.resize(config.final_k);
  return result;
}

std::string generation_result_to_json(const GenerationResult& result) {
  ordered_json j;
  j["input"] = result.input;
  j["direction"] = std::string(to_string(result.direction));
  j["fallback"] = result.fallback;
  j["skipped_unk_lemmas"] = result.skipped_unk_lemmas;
  ordered_json outputs = ordered_json::array();
  for (const GeneratedOutput& out : result.outputs) {
    ordered_json o;
    o["text"] = out.text;
    o["nll"] = out.nll;
    o["constraint"] = out.constraint;
    o["satisfied"] = out.satisfied;
    o["fallback"] = out.fallback;
    outputs.push_back(std::move(o));
  }
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> lower_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(text)) out.push_back(t.lower);
  return out;
}

bool contains_token_run(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); i++) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); k++) {
      if (haystack[i + k] != needle[k]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> knn_baseline(const std::string& input_sentence,
                                      const std::vector<CausalPair>& corpus,
                                      CausalDirection direction, std::size_t k) {
  const std::vector<std::string> needle = lower_tokens(input_sentence);
  std::map<std::string, std::uint64_t> counts;
  for (const CausalPair& pair : corpus) {
    const std::string& haystack_text =
        direction == CausalDirection::Cause ? pair.effect : pair.cause;
    if (!contains_token_run(lower_tokens(haystack_text), needle)) continue;
    const std::string& retrieved =
        direction == CausalDirection::Cause ? pair.cause : pair.effect;
    counts[retrieved]++;
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& [text, n] : ranked) {
    if (out.size() >= k) break;
    out.push_back(text);
  }
  return out;
}

namespace {

std::vector<std::string> whitespace_lower_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) i++;
    std::size_t b = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) i++;
    if (i > b) out.push_back(ascii_lower(text.substr(b, i - b)));
  }
  return out;
}

}  // namespace

double div_metric(const std::vector<std::string>& gold_answers,
                  const std::vector<std::string>& outputs_top3) {
  if (outputs_top3.empty() || outputs_top3.size() > 3)
    throw std::invalid_argument("div_metric expects 1 to 3 outputs");

  // clip counts: the max count of each token over the gold references
  std::map<std::string, std::uint64_t> max_ref;
  for (const std::string& gold : gold_answers) {
    std::map<std::string, std::uint64_t> counts;
    for (const std::string& tok : whitespace_lower_tokens(gold)) counts[tok]++;
    for (const auto& [tok, n] : counts) max_ref[tok] = std::max(max_ref[tok], n);
  }

  double precision_sum = 0.0;
  for (const std::string& output : outputs_top3) {
    std::vector<std::string> tokens = whitespace_lower_tokens(output);
    if (tokens.empty()) continue;  // empty output contributes precision 0
    std::map<std::string, std::uint64_t> counts;
    for (const std::string& tok : tokens) counts[tok]++;
    std::uint64_t clipped = 0;
    for (const auto& [tok, n] : counts) {
      auto it = max_ref.find(tok);
      if (it != max_ref.end()) clipped += std::min(n, it->second);
    }
    precision_sum += static_cast<double>(clipped) / static_cast<double>(tokens.size());
  }
  return precision_sum / static_cast<double>(outputs_top3.size());
}

}  // namespace causalgen
