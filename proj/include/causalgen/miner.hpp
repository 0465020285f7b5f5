// Pattern-based extraction of (cause, effect) sentence fragments.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalgen/text.hpp"

namespace causalgen {

enum class PatternCategory { EPC, CPE };

enum class SemanticClass { Cause, Explanation, Condition, Purpose, Prevention };

std::string_view to_string(PatternCategory c);
PatternCategory category_from_string(std::string_view s);

struct CausalPattern {
  std::string surface;                       // as written in the pattern file
  std::vector<std::string> surface_tokens;   // lowercased token sequence
  PatternCategory category = PatternCategory::EPC;
  SemanticClass semantic_class = SemanticClass::Cause;
  std::string id;
};

struct CausalPair {
  std::string cause;
  std::string effect;
  std::string pattern_id;
  PatternCategory direction = PatternCategory::EPC;
  std::string source_sentence;
  std::size_t source_offset = 0;  // byte offset of the sentence in its document
};

struct MinerConfig {
  std::vector<CausalPattern> patterns;
  int min_arg_tokens = 2;
  int negation_window = 3;
  bool enable_negation_filter = true;
  bool enable_passive_filter = true;

  static MinerConfig defaults();
};

std::vector<CausalPattern> parse_patterns_tsv(std::string_view tsv);
std::vector<CausalPattern> load_patterns_tsv(const std::string& path);
const std::vector<CausalPattern>& default_patterns();

// One pattern occurrence with the argument spans on each side, as half-open
// token index ranges after punctuation trimming.
struct PatternMatch {
  const CausalPattern* pattern = nullptr;
  std::size_t pattern_begin = 0, pattern_end = 0;
  std::size_t left_begin = 0, left_end = 0;
  std::size_t right_begin = 0, right_end = 0;
};

// Longest-surface occurrence wins when occurrences overlap; the sentence is
// rejected (nullopt) when zero occurrences survive or more than one does.
std::optional<PatternMatch> match_pattern(const std::vector<Token>& sentence,
                                          const MinerConfig& config);

// Source-cased text of a token range (a substring of the tokenized string).
std::string span_text(std::string_view source, const std::vector<Token>& tokens,
                      std::size_t begin, std::size_t end);

enum class RejectReason { TooShort, Negation, Passive };

std::string_view to_string(RejectReason r);

struct FilterDecision {
  bool accept = false;
  RejectReason reason = RejectReason::TooShort;
};

// Length, negation-cue and be+participle passive filters. The negation
// window before the pattern is checked against the candidate's source
// sentence when the pattern can be located in it.
FilterDecision apply_filters(const CausalPair& candidate, const MinerConfig& config);

struct MiningStats {
  std::uint64_t documents = 0;
  std::uint64_t malformed_documents = 0;
  std::uint64_t sentences = 0;
  std::uint64_t no_pattern = 0;
  std::uint64_t ambiguous = 0;
  std::uint64_t rejected_too_short = 0;
  std::uint64_t rejected_negation = 0;
  std::uint64_t rejected_passive = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t epc = 0;
  std::uint64_t cpe = 0;
  std::map<std::string, std::uint64_t> per_pattern;  // accepted pairs per pattern id

  void merge(const MiningStats& other);
};

struct MiningResult {
  std::vector<CausalPair> pairs;
  MiningStats stats;
};

// Extracts, filters and deduplicates over a batch of documents. Output is
// byte-identical for any thread count; threads = 0 picks the hardware count.
MiningResult mine_documents(const std::vector<std::string>& documents,
                            const MinerConfig& config, unsigned threads = 0);

// Dedup key: lowercased, whitespace-collapsed (cause, effect).
std::string pair_dedup_key(const CausalPair& pair);

// JSONL with fields {cause, effect, pattern, direction, sentence}.
std::string pairs_to_jsonl(const std::vector<CausalPair>& pairs);
std::vector<CausalPair> pairs_from_jsonl_file(const std::string& path);
std::string stats_to_json(const MiningStats& stats, bool with_timestamp);

}  // namespace causalgen
