// Beam search with disjunctive positive constraints: all constraint
// sequences share one trie, and completing any sequence of a set discharges
// (prunes) the whole set.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "causalgen/scoring.hpp"

namespace causalgen {

// One disjunctive set: the output must contain at least one of `sequences`
// as a contiguous token run.
struct DisjunctiveConstraintSet {
  int set_id = 0;
  std::vector<std::vector<TokenId>> sequences;
};

// Shared trie over every sequence of every set. The structure is immutable
// during search; whole-set pruning is realized through per-node owner links
// checked against a hypothesis's satisfied-set mask, so an edge is live
// exactly while some sequence through it belongs to an unsatisfied set.
class ConstraintTrie {
 public:
  struct Node {
    std::map<TokenId, int> children;
    std::vector<int> owners;     // dense set indices with a sequence through here
    std::vector<int> terminals;  // dense set indices of sequences ending here
    int depth = 0;
  };

  static ConstraintTrie build(std::span<const DisjunctiveConstraintSet> sets);

  int root() const { return 0; }
  const Node& node(int idx) const { return nodes_[static_cast<std::size_t>(idx)]; }
  std::size_t node_count() const { return nodes_.size(); }

  std::size_t num_sets() const { return set_ids_.size(); }
  int set_id(std::size_t dense_index) const { return set_ids_[dense_index]; }
  std::size_t sequence_count(std::size_t dense_index) const { return seq_counts_[dense_index]; }
  std::size_t total_sequences() const;

  // Live means: reachable by some unsatisfied set's sequence.
  bool node_live(int idx, const std::vector<bool>& satisfied_mask) const;

  // Root-to-terminal paths whose owner set is still unsatisfied.
  std::size_t live_terminal_paths(const std::vector<bool>& satisfied_mask) const;

 private:
  std::vector<Node> nodes_;
  std::vector<int> set_ids_;          // dense index -> external set_id
  std::vector<std::size_t> seq_counts_;
};

struct ConstraintState {
  std::vector<int> pointers;        // active trie nodes, sorted; root always present
  std::vector<bool> satisfied;      // by dense set index
  int satisfied_count = 0;

  bool all_satisfied() const {
    return satisfied_count == static_cast<int>(satisfied.size());
  }
  int unsatisfied_count() const {
    return static_cast<int>(satisfied.size()) - satisfied_count;
  }
};

ConstraintState initial_state(const ConstraintTrie& trie);

// Every pointer follows the token's child edge or dies; the root is
// re-seeded each step. Reaching a terminal satisfies every owning set at
// once, and pointers stranded on satisfied-only paths die with it.
ConstraintState advance_state(const ConstraintState& state, TokenId token,
                              const ConstraintTrie& trie);

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  ConstraintState state;
  bool finished = false;
  bool satisfied = false;
};

struct DecodeResult {
  std::vector<Hypothesis> hypotheses;  // ranked
  std::uint64_t scorer_calls = 0;
};

// Banked beam search per the constrained-decoding lineage: beam slots are
// split across banks keyed by satisfied-set count so constrained progress
// is never starved. Returned hypotheses are sorted by (all-satisfied first,
// log-prob desc, token ids lex asc); unsatisfied hypotheses are returned,
// flagged, only when no satisfying hypothesis exists.
DecodeResult constrained_beam_search(const TokenScorer& scorer,
                                     std::span<const DisjunctiveConstraintSet> sets,
                                     std::size_t beam_size, std::size_t k_max);

// Plain N-best beam search (no constraint machinery); same candidate rules
// and tie-breaking as the constrained search with an empty constraint set.
DecodeResult nbest_decode(const TokenScorer& scorer, std::size_t beam_size,
                          std::size_t k_max);

// Ancestral sampling from the full next-token distribution; reproducible
// for a fixed seed.
DecodeResult random_sampling_decode(const TokenScorer& scorer, std::size_t n_samples,
                                    std::size_t k_max, std::uint64_t seed);

// JSON constraint format: a list of sets, each a list of strings; each
// string is whitespace-tokenized through the vocabulary. Any token missing
// from the vocabulary is an error.
std::vector<DisjunctiveConstraintSet> parse_constraint_sets(std::string_view json_text,
                                                            const Vocabulary& vocab);

}  // namespace causalgen
