// Acceptance suite: one check per criterion, one PASS/FAIL line each.
// Exit code 0 only if every criterion passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causalgen/ceg.hpp"
#include "causalgen/decoding.hpp"
#include "causalgen/miner.hpp"
#include "causalgen/morphology.hpp"
#include "causalgen/pipeline.hpp"
#include "causalgen/scoring.hpp"
#include "fixture_corpus.hpp"
#include "oracles.hpp"
#include "test_scorers.hpp"

using namespace causalgen;
namespace cgt = causalgen::testing;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool expect(bool ok, const std::string& what, std::string& detail) {
  if (!ok && detail.empty()) detail = what;
  return ok;
}

// Shared random-instance generator for the decoding criteria: |V| in [6,8],
// 1-3 disjunctive sets of 1-4 variants, variants of 1-2 tokens (satisfiable
// within k_max = 6 by construction).
struct Instance {
  Vocabulary vocab;
  std::vector<DisjunctiveConstraintSet> sets;
};

Instance random_instance(std::mt19937& rng) {
  const std::size_t content = 3 + rng() % 3;
  Instance inst;
  inst.vocab = cgt::toy_vocab(content);
  const std::size_t n_sets = 1 + rng() % 3;
  for (std::size_t s = 0; s < n_sets; s++) {
    DisjunctiveConstraintSet set;
    set.set_id = static_cast<int>(s);
    const std::size_t n_var = 1 + rng() % 4;
    for (std::size_t v = 0; v < n_var; v++) {
      std::vector<TokenId> seq;
      const std::size_t len = 1 + rng() % 2;
      for (std::size_t i = 0; i < len; i++)
        seq.push_back(static_cast<TokenId>(3 + rng() % content));
      set.sequences.push_back(std::move(seq));
    }
    inst.sets.push_back(std::move(set));
  }
  return inst;
}

// --- 1 -----------------------------------------------------------------

bool criterion_dpc_oracle(std::string& detail) {
  const auto started = std::chrono::steady_clock::now();
  std::mt19937 rng(116);
  for (int trial = 0; trial < 50; trial++) {
    Instance inst = random_instance(rng);
    cgt::HashScorer scorer(inst.vocab, rng());
    DecodeResult dpc = constrained_beam_search(scorer, inst.sets, 4096, 6);
    cgt::OracleBest oracle = cgt::exhaustive_constrained_argmax(scorer, inst.sets, 6);
    if (!expect(oracle.found, "oracle found no satisfying sequence", detail)) return false;
    if (!expect(!dpc.hypotheses.empty() && dpc.hypotheses.front().satisfied,
                "search returned no satisfied hypothesis", detail))
      return false;
    const double gap = std::abs(dpc.hypotheses.front().log_prob - oracle.log_prob);
    if (gap >= 1e-9) {
      std::ostringstream os;
      os << "trial " << trial << ": score gap " << gap;
      detail = os.str();
      return false;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (seconds >= 60.0) {
    detail = "runtime " + std::to_string(seconds) + "s exceeds 60s";
    return false;
  }
  return true;
}

// --- 2 -----------------------------------------------------------------

bool criterion_reductions(std::string& detail) {
  std::mt19937 rng(217);
  for (int trial = 0; trial < 100; trial++) {
    const std::size_t content = 3 + rng() % 4;
    cgt::HashScorer scorer(cgt::toy_vocab(content), rng());
    const std::size_t beam = 1 + rng() % 5;
    const std::size_t k_max = 2 + rng() % 4;
    DecodeResult dpc = constrained_beam_search(
        scorer, std::span<const DisjunctiveConstraintSet>{}, beam, k_max);
    DecodeResult nbest = nbest_decode(scorer, beam, k_max);
    if (dpc.hypotheses.size() != nbest.hypotheses.size()) {
      detail = "empty-constraint reduction: result size mismatch";
      return false;
    }
    for (std::size_t i = 0; i < dpc.hypotheses.size(); i++) {
      if (dpc.hypotheses[i].tokens != nbest.hypotheses[i].tokens ||
          dpc.hypotheses[i].log_prob != nbest.hypotheses[i].log_prob) {
        detail = "empty-constraint reduction: hypotheses differ";
        return false;
      }
    }
  }
  for (int trial = 0; trial < 100; trial++) {
    const std::size_t content = 3 + rng() % 4;
    Vocabulary vocab = cgt::toy_vocab(content);
    cgt::HashScorer scorer(vocab, rng());
    const TokenId tok = static_cast<TokenId>(3 + rng() % content);
    const std::size_t beam = 2 + rng() % 4;
    const std::size_t k_max = 2 + rng() % 4;
    std::vector<DisjunctiveConstraintSet> sets(1);
    sets[0].set_id = 0;
    sets[0].sequences = {{tok}};
    DecodeResult dpc = constrained_beam_search(scorer, sets, beam, k_max);
    DecodeResult conj = cgt::conjunctive_beam_decode(scorer, {{tok}}, beam, k_max);
    if (dpc.hypotheses.size() != conj.hypotheses.size()) {
      detail = "conjunctive reduction: result size mismatch";
      return false;
    }
    for (std::size_t i = 0; i < dpc.hypotheses.size(); i++) {
      if (dpc.hypotheses[i].tokens != conj.hypotheses[i].tokens ||
          dpc.hypotheses[i].log_prob != conj.hypotheses[i].log_prob ||
          dpc.hypotheses[i].satisfied != conj.hypotheses[i].satisfied) {
        detail = "conjunctive reduction: hypotheses differ";
        return false;
      }
    }
  }
  return true;
}

// --- 3 -----------------------------------------------------------------

bool criterion_satisfaction_soundness(std::string& detail) {
  std::mt19937 rng(318);
  std::size_t decodes = 0, satisfied = 0;
  while (decodes < 1000) {
    Instance inst = random_instance(rng);
    cgt::HashScorer scorer(inst.vocab, rng());
    const std::size_t beam = 2 + rng() % 7;
    DecodeResult dpc = constrained_beam_search(scorer, inst.sets, beam, 6);
    decodes++;
    for (const Hypothesis& h : dpc.hypotheses) {
      if (!h.satisfied) continue;
      satisfied++;
      if (!cgt::satisfies_all(h.tokens, inst.sets)) {
        detail = "satisfied-flagged output fails the independent substring scan";
        return false;
      }
    }
  }
  if (satisfied < 1000) {
    detail = "too few satisfied outputs to be meaningful";
    return false;
  }
  return true;
}

// --- 4 -----------------------------------------------------------------

bool criterion_single_pass_efficiency(std::string& detail) {
  Vocabulary vocab = cgt::toy_vocab(13);
  cgt::HashScorer scorer(vocab, 4019);
  std::vector<DisjunctiveConstraintSet> sets;
  for (int s = 0; s < 3; s++) {
    DisjunctiveConstraintSet set;
    set.set_id = s;
    for (int v = 0; v < 4; v++) set.sequences.push_back({static_cast<TokenId>(3 + s * 4 + v)});
    sets.push_back(std::move(set));
  }
  const std::size_t beam = 8, k_max = 8;
  DecodeResult dpc = constrained_beam_search(scorer, sets, beam, k_max);
  if (!expect(!dpc.hypotheses.empty() && dpc.hypotheses.front().satisfied,
              "DPC search failed to satisfy the 3-set instance", detail))
    return false;

  std::uint64_t baseline = 0;
  for (int a = 0; a < 4; a++)
    for (int b = 0; b < 4; b++)
      for (int c = 0; c < 4; c++) {
        std::vector<DisjunctiveConstraintSet> combo(3);
        combo[0].set_id = 0;
        combo[0].sequences = {{static_cast<TokenId>(3 + a)}};
        combo[1].set_id = 1;
        combo[1].sequences = {{static_cast<TokenId>(7 + b)}};
        combo[2].set_id = 2;
        combo[2].sequences = {{static_cast<TokenId>(11 + c)}};
        baseline += constrained_beam_search(scorer, combo, beam, k_max).scorer_calls;
      }
  if (dpc.scorer_calls * 10 > baseline) {
    std::ostringstream os;
    os << "DPC used " << dpc.scorer_calls << " scorer calls vs baseline " << baseline;
    detail = os.str();
    return false;
  }
  return true;
}

// --- 5 -----------------------------------------------------------------

bool criterion_miner_fidelity(std::string& detail) {
  MinerConfig config = MinerConfig::defaults();
  MiningResult result = mine_documents(cgt::fixture_documents(), config, 1);
  const auto& gold = cgt::fixture_gold_pairs();
  if (result.pairs.size() != gold.size()) {
    detail = "expected " + std::to_string(gold.size()) + " pairs, mined " +
             std::to_string(result.pairs.size());
    return false;
  }
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (result.pairs[i].cause != gold[i].cause || result.pairs[i].effect != gold[i].effect ||
        result.pairs[i].pattern_id != gold[i].pattern_id ||
        result.pairs[i].direction != gold[i].direction) {
      detail = "pair " + std::to_string(i) + " differs from gold";
      return false;
    }
  }
  for (const CausalPair& p : result.pairs) {
    const std::size_t cause_at = p.source_sentence.find(p.cause);
    const std::size_t effect_at = p.source_sentence.find(p.effect);
    const bool epc_ok = p.direction != PatternCategory::EPC || effect_at < cause_at;
    const bool cpe_ok = p.direction != PatternCategory::CPE || cause_at < effect_at;
    if (!expect(epc_ok && cpe_ok, "direction order violated in " + p.source_sentence, detail))
      return false;
  }

  // the canonical example sentences must split exactly
  {
    const std::string s = "I am very sad because I lost my phone";
    auto tokens = tokenize(s);
    auto m = match_pattern(tokens, config);
    if (!expect(m.has_value(), "EPC example did not match", detail)) return false;
    if (!expect(span_text(s, tokens, m->left_begin, m->left_end) == "I am very sad" &&
                    span_text(s, tokens, m->right_begin, m->right_end) == "I lost my phone",
                "EPC example split mismatch", detail))
      return false;
  }
  {
    const std::string s = "The earthquake resulted in many deaths";
    auto tokens = tokenize(s);
    auto m = match_pattern(tokens, config);
    if (!expect(m.has_value(), "CPE example did not match", detail)) return false;
    if (!expect(span_text(s, tokens, m->left_begin, m->left_end) == "The earthquake" &&
                    span_text(s, tokens, m->right_begin, m->right_end) == "many deaths",
                "CPE example split mismatch", detail))
      return false;
  }
  return true;
}

// --- 6 -----------------------------------------------------------------

bool criterion_ceg_fidelity(std::string& detail) {
  const Lexicon& lexicon = Lexicon::builtin();

  CausalPair storm;
  storm.cause = "The storm";
  storm.effect = "a tremendous amount of damage on the landing beaches";
  std::set<CauseEffectGraph::Edge> expected = {
      {"storm", "tremendous"}, {"storm", "amount"}, {"storm", "damage"},
      {"storm", "landing"},    {"storm", "beach"},
  };
  if (extract_lexical_pairs(storm, lexicon) != expected) {
    detail = "storm sentence did not yield the five listed lexical pairs";
    return false;
  }

  CausalPair simple;
  simple.cause = "the storm";
  simple.effect = "heavy damage";
  std::vector<CausalPair> six(6, simple), five(5, simple);
  if (build_graph(six, 5, lexicon, 1).edge_freq("storm", "damage") != 6) {
    detail = "frequency-6 edge missing at threshold 5";
    return false;
  }
  if (build_graph(five, 5, lexicon, 1).edge_count() != 0) {
    detail = "frequency-5 edge survived threshold 5";
    return false;
  }

  MiningResult mined = mine_documents(cgt::fixture_documents(), MinerConfig::defaults(), 1);
  const std::uint64_t h1 = build_graph(mined.pairs, 0, lexicon, 1).content_hash();
  const std::uint64_t h2 = build_graph(mined.pairs, 0, lexicon, 2).content_hash();
  std::vector<CausalPair> reversed(mined.pairs.rbegin(), mined.pairs.rend());
  const std::uint64_t h3 = build_graph(reversed, 0, lexicon, 3).content_hash();
  if (h1 != h2 || h1 != h3) {
    detail = "graph hash differs across shard configurations";
    return false;
  }
  return true;
}

// --- 7 -----------------------------------------------------------------

bool criterion_scoring_formulas(std::string& detail) {
  // exact up to the exp(log(.)) round-trip, pinned at 1e-12
  NGramModel uniform = train_ngram({}, 1, 1.0);
  const double ppl = perplexity(uniform, {{"x"}, {"y", "z"}});
  if (std::abs(ppl - 3.0) > 1e-12) {
    detail = "uniform perplexity " + std::to_string(ppl) + " != |V| = 3";
    return false;
  }

  const double e1 =
      margin_ranking_loss(std::vector<double>{0.9}, std::vector<double>{0.2}, 0.3, 0.0, 0.0);
  const double e2 =
      margin_ranking_loss(std::vector<double>{0.5}, std::vector<double>{0.4}, 0.3, 0.0, 0.0);
  const double e3 = margin_ranking_loss(std::vector<double>{0.5, 0.1},
                                        std::vector<double>{0.4, 0.3}, 0.3, 1e-5, 2.0);
  if (std::abs(e1 - 0.0) > 1e-12 || std::abs(e2 - 0.2) > 1e-12 ||
      std::abs(e3 - 0.70001) > 1e-12) {
    detail = "margin loss examples out of tolerance";
    return false;
  }

  NGramModel bigram = train_ngram({{"a", "b"}, {"a", "b"}}, 2, 1.0);
  std::vector<TokenId> prefix{bigram.vocab().id_or_unk("a")};
  const double p = std::exp(bigram.log_prob(prefix, bigram.vocab().id_or_unk("b")));
  if (std::abs(p - 3.0 / 7.0) > 1e-12) {
    detail = "P(b|a) differs from 3/7 by more than 1e-12";
    return false;
  }
  return true;
}

// --- 8 -----------------------------------------------------------------

bool criterion_pipeline_end_to_end(std::string& detail) {
  NGramModel model = train_ngram(
      {
          {"love", "helps", "people"}, {"loved", "people", "care"},
          {"loving", "care", "helps"}, {"loves", "help", "people"},
          {"pain", "fades", "slowly"}, {"pains", "fade", "slowly"},
          {"people", "love", "care"},  {"pain", "hurts", "people"},
      },
      2, 0.5);
  CauseEffectGraph::EdgeMap counts;
  counts[{"love", "cry"}] = 10;
  counts[{"pain", "cry"}] = 7;
  counts[{"love", "baby"}] = 3;
  CauseEffectGraph graph = CauseEffectGraph::from_counts(std::move(counts), 0);
  const Lexicon& lexicon = Lexicon::builtin();

  GenerationConfig config;
  config.direction = CausalDirection::Cause;
  config.n_constraints = 2;
  config.per_constraint_keep = 3;
  config.final_k = 5;
  config.beam_size = 6;
  config.k_max = 4;
  config.threads = 1;

  GenerationResult run1 = generate("babies cry", graph, model, lexicon, config);
  if (!expect(!run1.fallback && !run1.outputs.empty() &&
                  run1.outputs.size() <= config.final_k,
              "generate returned no outputs", detail))
    return false;
  for (const GeneratedOutput& out : run1.outputs) {
    std::set<std::string> variants = lexicon.variants(out.constraint);
    std::istringstream in(out.text);
    std::string tok;
    bool has = false;
    while (in >> tok)
      if (variants.count(tok)) has = true;
    if (!expect(has, "output lacks a variant of its constraint: " + out.text, detail))
      return false;
  }
  for (std::size_t i = 1; i < run1.outputs.size(); i++) {
    if (!expect(run1.outputs[i - 1].nll <= run1.outputs[i].nll, "outputs not NLL-sorted",
                detail))
      return false;
  }

  const std::string once = generation_result_to_json(run1);
  const std::string twice =
      generation_result_to_json(generate("babies cry", graph, model, lexicon, config));
  config.threads = 2;
  const std::string threaded =
      generation_result_to_json(generate("babies cry", graph, model, lexicon, config));
  if (!expect(once == twice && once == threaded,
              "generation differs across runs or thread counts", detail))
    return false;
  return true;
}

// --- 9 -----------------------------------------------------------------

bool criterion_div_metric(std::string& detail) {
  if (div_metric({"it rained hard"}, {"it rained hard"}) != 1.0) {
    detail = "identical output should score exactly 1.0";
    return false;
  }
  if (div_metric({"it rained hard"}, {"totally unrelated words"}) != 0.0) {
    detail = "disjoint output should score exactly 0.0";
    return false;
  }
  if (std::abs(div_metric({"it rained hard"}, {"it it snowed"}) - 1.0 / 3.0) > 1e-12) {
    detail = "clipped precision example should equal 1/3";
    return false;
  }

  std::mt19937 rng(919);
  const std::vector<std::string> words = {"a", "b", "c", "rain", "sun", "x"};
  auto random_text = [&]() {
    std::string s;
    const std::size_t len = rng() % 6;
    for (std::size_t i = 0; i < len; i++) {
      if (!s.empty()) s += ' ';
      s += words[rng() % words.size()];
    }
    return s;
  };
  for (int trial = 0; trial < 1000; trial++) {
    std::vector<std::string> golds, outputs;
    const std::size_t n_gold = 1 + rng() % 3, n_out = 1 + rng() % 3;
    for (std::size_t i = 0; i < n_gold; i++) golds.push_back(random_text());
    for (std::size_t i = 0; i < n_out; i++) outputs.push_back(random_text());
    const double d = div_metric(golds, outputs);
    if (!(d >= 0.0 && d <= 1.0)) {
      detail = "metric escaped [0,1] on fuzzed case";
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"DPC oracle equivalence (50 randomized instances, beam 4096, < 60 s)",
       criterion_dpc_oracle},
      {"reduction identities (100x empty-set == n-best, 100x singleton == conjunctive)",
       criterion_reductions},
      {"satisfaction soundness (1000 decodes, independent substring scan)",
       criterion_satisfaction_soundness},
      {"single-pass efficiency (3x4 variants, <= 10% of 64-pass baseline calls)",
       criterion_single_pass_efficiency},
      {"miner fidelity (fixture gold set + canonical example splits)",
       criterion_miner_fidelity},
      {"CEG fidelity (storm pairs, threshold boundary, shard invariance)",
       criterion_ceg_fidelity},
      {"scoring formulas (uniform perplexity, margin loss, n-gram probability)",
       criterion_scoring_formulas},
      {"pipeline end-to-end (babies cry: constrained, sorted, deterministic)",
       criterion_pipeline_end_to_end},
      {"Div metric (tagged examples exact, bounded on 1000 fuzzed cases)",
       criterion_div_metric},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); i++) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %zu. %s%s%s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) failures++;
  }
  std::printf("%d/%zu acceptance criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
