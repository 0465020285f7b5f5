// Cause Effect Graph: a frequency-weighted directed graph over lemmas.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalgen/miner.hpp"
#include "causalgen/morphology.hpp"

namespace causalgen {

enum class GraphDirection { CauseOf, EffectOf };

struct WeightedLemma {
  std::string lemma;
  std::uint64_t freq = 0;

  bool operator==(const WeightedLemma&) const = default;
};

class CauseEffectGraph {
 public:
  using Edge = std::pair<std::string, std::string>;  // (cause_lemma, effect_lemma)
  using EdgeMap = std::map<Edge, std::uint64_t>;

  CauseEffectGraph() = default;

  // Drops edges with freq <= threshold and builds the in/out indices,
  // sorted by (freq desc, lemma asc).
  static CauseEffectGraph from_counts(EdgeMap counts, std::uint64_t threshold);

  const EdgeMap& edges() const { return edges_; }
  std::uint64_t edge_freq(const std::string& cause, const std::string& effect) const;
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t node_count() const;

  // nullptr when the lemma has no edges in that direction.
  const std::vector<WeightedLemma>* out_edges(const std::string& cause_lemma) const;
  const std::vector<WeightedLemma>* in_edges(const std::string& effect_lemma) const;

  // Writes the sorted TSV edge list at `path` and a binary index sidecar at
  // `path + ".idx"`; both carry a versioned magic header.
  void save(const std::string& path) const;
  static CauseEffectGraph load(const std::string& path);

  // Order-independent digest of the edge multiset.
  std::uint64_t content_hash() const;

  bool operator==(const CauseEffectGraph& other) const { return edges_ == other.edges_; }

 private:
  void build_indices();

  EdgeMap edges_;
  std::unordered_map<std::string, std::vector<WeightedLemma>> out_index_;
  std::unordered_map<std::string, std::vector<WeightedLemma>> in_index_;
};

// Cartesian product of the open-class lemmas on each side of the pair.
std::set<CauseEffectGraph::Edge> extract_lexical_pairs(const CausalPair& pair,
                                                       const Lexicon& lexicon);

// Exact multiset counting over all extracted lexical pairs; result is
// independent of input order and thread count.
CauseEffectGraph build_graph(const std::vector<CausalPair>& pairs, std::uint64_t threshold,
                             const Lexicon& lexicon, unsigned threads = 0);

// Candidates connected to any input lemma in the requested direction,
// frequency-summed, (freq desc, lemma asc) ranked, truncated to n.
// Candidates equal to an input lemma are excluded.
std::vector<WeightedLemma> query_candidates(const CauseEffectGraph& graph,
                                            const std::set<std::string>& input_lemmas,
                                            GraphDirection direction, std::size_t n);

}  // namespace causalgen
