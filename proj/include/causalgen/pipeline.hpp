// End-to-end guided generation: constraint lemmas from the graph,
// morphological expansion, one constrained decode per lemma, merge and
// rerank by negative log-likelihood. Also the KNN retrieval baseline and
// the lexical-diversity metric.
#pragma once

#include <string>
#include <vector>

#include "causalgen/ceg.hpp"
#include "causalgen/decoding.hpp"
#include "causalgen/morphology.hpp"

namespace causalgen {

enum class CausalDirection { Cause, Effect };

std::string_view to_string(CausalDirection d);

struct GenerationConfig {
  CausalDirection direction = CausalDirection::Cause;
  std::size_t n_constraints = 300;     // N: graph candidates to expand
  std::size_t per_constraint_keep = 5; // M: hypotheses kept per decode
  std::size_t final_k = 10;            // K: merged outputs returned
  std::size_t beam_size = 8;
  std::size_t k_max = 16;
  bool length_normalize = false;       // NLL per scored token instead of raw sum
  unsigned threads = 0;                // fan-out parallelism; 0 = hardware
};

struct GeneratedOutput {
  std::string text;
  double nll = 0.0;
  std::string constraint;  // constraint lemma; empty for fallback outputs
  bool satisfied = false;
  bool fallback = false;
};

struct GenerationResult {
  std::string input;
  CausalDirection direction = CausalDirection::Cause;
  bool fallback = false;               // no graph hit; unconstrained decode used
  std::size_t skipped_unk_lemmas = 0;  // lemmas whose variants were all out-of-vocabulary
  std::vector<GeneratedOutput> outputs;  // NLL ascending, at most final_k
};

GenerationResult generate(const std::string& input_sentence, const CauseEffectGraph& graph,
                          const TokenScorer& scorer, const Lexicon& lexicon,
                          const GenerationConfig& config);

std::string generation_result_to_json(const GenerationResult& result);

// Pairs whose opposite-side argument contains the input as a contiguous
// case-insensitive token run; returns their cause (direction Cause) or
// effect (direction Effect) texts ranked by source frequency.
std::vector<std::string> knn_baseline(const std::string& input_sentence,
                                      const std::vector<CausalPair>& corpus,
                                      CausalDirection direction, std::size_t k);

// Modified BLEU-1 without brevity penalty: per-output clipped unigram
// precision against the union of gold references, averaged over outputs.
// Lower means lexically more diverse.
double div_metric(const std::vector<std::string>& gold_answers,
                  const std::vector<std::string>& outputs_top3);

}  // namespace causalgen
