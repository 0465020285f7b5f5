#include "causalgen/decoding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "causalgen/errors.hpp"

namespace causalgen {

namespace {

void add_unique(std::vector<int>& v, int x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

ConstraintTrie ConstraintTrie::build(std::span<const DisjunctiveConstraintSet> sets) {
  ConstraintTrie trie;
  trie.nodes_.push_back(Node{});
  for (std::size_t dense = 0; dense < sets.size(); dense++) {
    const DisjunctiveConstraintSet& s = sets[dense];
    if (s.sequences.empty())
      throw std::invalid_argument("disjunctive constraint set must be non-empty");
    trie.set_ids_.push_back(s.set_id);

    std::set<std::vector<TokenId>> unique_seqs(s.sequences.begin(), s.sequences.end());
    trie.seq_counts_.push_back(unique_seqs.size());
    for (const std::vector<TokenId>& seq : unique_seqs) {
      if (seq.empty()) throw std::invalid_argument("constraint sequence must be non-empty");
      int at = trie.root();
      for (TokenId tok : seq) {
        auto it = trie.nodes_[static_cast<std::size_t>(at)].children.find(tok);
        int next;
        if (it == trie.nodes_[static_cast<std::size_t>(at)].children.end()) {
          next = static_cast<int>(trie.nodes_.size());
          Node n;
          n.depth = trie.nodes_[static_cast<std::size_t>(at)].depth + 1;
          trie.nodes_.push_back(std::move(n));
          trie.nodes_[static_cast<std::size_t>(at)].children.emplace(tok, next);
        } else {
          next = it->second;
        }
        add_unique(trie.nodes_[static_cast<std::size_t>(next)].owners,
                   static_cast<int>(dense));
        at = next;
      }
      add_unique(trie.nodes_[static_cast<std::size_t>(at)].terminals,
                 static_cast<int>(dense));
    }
  }
  return trie;
}

std::size_t ConstraintTrie::total_sequences() const {
  std::size_t total = 0;
  for (std::size_t c : seq_counts_) total += c;
  return total;
}

bool ConstraintTrie::node_live(int idx, const std::vector<bool>& satisfied_mask) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (idx == root()) return true;
  for (int owner : n.owners)
    if (!satisfied_mask[static_cast<std::size_t>(owner)]) return true;
  return false;
}

std::size_t ConstraintTrie::live_terminal_paths(const std::vector<bool>& satisfied_mask) const {
  std::size_t live = 0;
  for (const Node& n : nodes_)
    for (int t : n.terminals)
      if (!satisfied_mask[static_cast<std::size_t>(t)]) live++;
  return live;
}

ConstraintState initial_state(const ConstraintTrie& trie) {
  ConstraintState st;
  st.pointers.push_back(trie.root());
  st.satisfied.assign(trie.num_sets(), false);
  st.satisfied_count = 0;
  return st;
}

ConstraintState advance_state(const ConstraintState& state, TokenId token,
                              const ConstraintTrie& trie) {
  ConstraintState next;
  next.satisfied = state.satisfied;
  next.satisfied_count = state.satisfied_count;

  std::vector<int> advanced;
  for (int p : state.pointers) {
    const auto& children = trie.node(p).children;
    auto it = children.find(token);
    if (it == children.end()) continue;
    if (!trie.node_live(it->second, state.satisfied)) continue;
    add_unique(advanced, it->second);
  }
  // terminals reached on this step satisfy every owning set at once
  for (int q : advanced) {
    for (int dense : trie.node(q).terminals) {
      if (!next.satisfied[static_cast<std::size_t>(dense)]) {
        next.satisfied[static_cast<std::size_t>(dense)] = true;
        next.satisfied_count++;
      }
    }
  }
  // pointers on now-satisfied-only paths die; the root is re-seeded
  next.pointers.push_back(trie.root());
  for (int q : advanced)
    if (trie.node_live(q, next.satisfied)) add_unique(next.pointers, q);
  std::sort(next.pointers.begin(), next.pointers.end());
  return next;
}

namespace {

bool token_sequence_less(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Final ranking: satisfied first, then log-prob, then lexicographic tokens.
bool ranked_less(const Hypothesis& a, const Hypothesis& b) {
  if (a.satisfied != b.satisfied) return a.satisfied;
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return token_sequence_less(a.tokens, b.tokens);
}

// In-beam ordering within a bank: log-prob then lexicographic tokens.
bool beam_less(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return token_sequence_less(a.tokens, b.tokens);
}

// Candidate tokens for one hypothesis: the best `beam_size` permitted
// tokens plus every token that advances a live trie pointer. BOS and UNK
// are never proposed; EOS is permitted only once every set is satisfied.
std::vector<TokenId> candidate_tokens(const std::vector<double>& scores,
                                      const Hypothesis& hyp, const ConstraintTrie* trie,
                                      std::size_t beam_size) {
  const std::size_t v = scores.size();
  const bool eos_allowed = hyp.state.all_satisfied();

  std::vector<TokenId> order(v);
  for (std::size_t i = 0; i < v; i++) order[i] = static_cast<TokenId>(i);
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });

  std::vector<bool> chosen(v, false);
  std::vector<TokenId> out;
  std::size_t taken = 0;
  for (TokenId t : order) {
    if (taken >= beam_size) break;
    if (t == Vocabulary::kBos || t == Vocabulary::kUnk) continue;
    if (t == Vocabulary::kEos && !eos_allowed) continue;
    chosen[static_cast<std::size_t>(t)] = true;
    out.push_back(t);
    taken++;
  }
  if (trie) {
    for (int p : hyp.state.pointers) {
      for (const auto& [tok, child] : trie->node(p).children) {
        if (!trie->node_live(child, hyp.state.satisfied)) continue;
        if (!chosen[static_cast<std::size_t>(tok)]) {
          chosen[static_cast<std::size_t>(tok)] = true;
          out.push_back(tok);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Beam slots per bank: one slot each (highest banks first when slots are
// scarce), the surplus split evenly with the remainder to higher banks,
// then unused slots redistributed downward from the highest bank.
std::vector<Hypothesis> select_banked(std::vector<Hypothesis>& pool, std::size_t beam_size) {
  std::map<int, std::vector<Hypothesis*>> banks;
  for (Hypothesis& h : pool) banks[h.state.satisfied_count].push_back(&h);
  for (auto& [count, bank] : banks)
    std::sort(bank.begin(), bank.end(),
              [](const Hypothesis* a, const Hypothesis* b) { return beam_less(*a, *b); });

  const std::size_t b = banks.size();
  std::vector<std::pair<int, std::vector<Hypothesis*>*>> ordered;  // asc by satisfied count
  for (auto& [count, bank] : banks) ordered.emplace_back(count, &bank);

  std::vector<std::size_t> slots(b, 0);
  if (beam_size < b) {
    for (std::size_t i = 0; i < beam_size; i++) slots[b - 1 - i] = 1;
  } else {
    std::size_t rem = beam_size - b;
    std::size_t q = rem / b, r = rem % b;
    for (std::size_t i = 0; i < b; i++) slots[i] = 1 + q;
    for (std::size_t i = 0; i < r; i++) slots[b - 1 - i] += 1;
  }

  std::vector<std::size_t> take(b, 0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < b; i++) {
    take[i] = std::min(slots[i], ordered[i].second->size());
    used += take[i];
  }
  std::size_t leftover = beam_size > used ? beam_size - used : 0;
  for (std::size_t i = b; i-- > 0 && leftover > 0;) {
    std::size_t extra = std::min(leftover, ordered[i].second->size() - take[i]);
    take[i] += extra;
    leftover -= extra;
  }

  std::vector<Hypothesis> next;
  next.reserve(std::min(beam_size, pool.size()));
  for (std::size_t i = 0; i < b; i++)
    for (std::size_t k = 0; k < take[i]; k++) next.push_back(std::move(*(*ordered[i].second)[k]));
  return next;
}

const ConstraintTrie& empty_trie() {
  static const ConstraintTrie trie =
      ConstraintTrie::build(std::span<const DisjunctiveConstraintSet>{});
  return trie;
}

DecodeResult run_beam_search(const TokenScorer& scorer, const ConstraintTrie* trie,
                             std::size_t beam_size, std::size_t k_max) {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");

  DecodeResult result;
  const ConstraintTrie& t = trie ? *trie : empty_trie();

  Hypothesis start;
  start.state = initial_state(t);
  std::vector<Hypothesis> beam{std::move(start)};
  std::vector<Hypothesis> finished;

  for (std::size_t step = 1; step <= k_max && !beam.empty(); step++) {
    std::vector<Hypothesis> pool;
    for (const Hypothesis& hyp : beam) {
      std::vector<double> scores = scorer.score_next(hyp.tokens);
      result.scorer_calls++;
      for (TokenId tok : candidate_tokens(scores, hyp, trie, beam_size)) {
        Hypothesis cand;
        cand.tokens = hyp.tokens;
        cand.tokens.push_back(tok);
        cand.log_prob = hyp.log_prob + scores[static_cast<std::size_t>(tok)];
        if (tok == Vocabulary::kEos) {
          cand.state = hyp.state;
          cand.finished = true;
          cand.satisfied = cand.state.all_satisfied();
          finished.push_back(std::move(cand));
          continue;
        }
        cand.state = advance_state(hyp.state, tok, t);
        if (cand.tokens.size() >= k_max) {
          cand.finished = true;
          cand.satisfied = cand.state.all_satisfied();
          finished.push_back(std::move(cand));
        } else {
          pool.push_back(std::move(cand));
        }
      }
    }
    if (pool.empty()) break;
    beam = select_banked(pool, beam_size);
  }

  std::sort(finished.begin(), finished.end(), ranked_less);
  bool any_satisfied = !finished.empty() && finished.front().satisfied;
  if (any_satisfied) {
    auto first_unsat = std::find_if(finished.begin(), finished.end(),
                                    [](const Hypothesis& h) { return !h.satisfied; });
    finished.erase(first_unsat, finished.end());
  }
  result.hypotheses = std::move(finished);
  return result;
}

}  // namespace

DecodeResult constrained_beam_search(const TokenScorer& scorer,
                                     std::span<const DisjunctiveConstraintSet> sets,
                                     std::size_t beam_size, std::size_t k_max) {
  ConstraintTrie trie = ConstraintTrie::build(sets);
  return run_beam_search(scorer, &trie, beam_size, k_max);
}

DecodeResult nbest_decode(const TokenScorer& scorer, std::size_t beam_size,
                          std::size_t k_max) {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");

  DecodeResult result;

  Hypothesis start;
  start.state = initial_state(empty_trie());
  std::vector<Hypothesis> beam{std::move(start)};
  std::vector<Hypothesis> finished;

  for (std::size_t step = 1; step <= k_max && !beam.empty(); step++) {
    std::vector<Hypothesis> pool;
    for (const Hypothesis& hyp : beam) {
      std::vector<double> scores = scorer.score_next(hyp.tokens);
      result.scorer_calls++;
      for (TokenId tok : candidate_tokens(scores, hyp, nullptr, beam_size)) {
        Hypothesis cand;
        cand.tokens = hyp.tokens;
        cand.tokens.push_back(tok);
        cand.log_prob = hyp.log_prob + scores[static_cast<std::size_t>(tok)];
        cand.state = hyp.state;
        if (tok == Vocabulary::kEos || cand.tokens.size() >= k_max) {
          cand.finished = true;
          cand.satisfied = true;
          finished.push_back(std::move(cand));
        } else {
          pool.push_back(std::move(cand));
        }
      }
    }
    if (pool.empty()) break;
    std::sort(pool.begin(), pool.end(), beam_less);
    if (pool.size() > beam_size) pool.resize(beam_size);
    beam = std::move(pool);
  }

  for (Hypothesis& h : finished) h.satisfied = true;
  std::sort(finished.begin(), finished.end(), ranked_less);
  result.hypotheses = std::move(finished);
  return result;
}

DecodeResult random_sampling_decode(const TokenScorer& scorer, std::size_t n_samples,
                                    std::size_t k_max, std::uint64_t seed) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  DecodeResult result;
  std::mt19937_64 rng(seed);
  auto next_uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  };

  for (std::size_t s = 0; s < n_samples; s++) {
    Hypothesis hyp;
    while (hyp.tokens.size() < k_max) {
      std::vector<double> scores = scorer.score_next(hyp.tokens);
      result.scorer_calls++;
      const double u = next_uniform();
      double cum = 0.0;
      TokenId pick = static_cast<TokenId>(scores.size() - 1);
      for (std::size_t w = 0; w < scores.size(); w++) {
        cum += std::exp(scores[w]);
        if (u < cum) {
          pick = static_cast<TokenId>(w);
          break;
        }
      }
      hyp.tokens.push_back(pick);
      hyp.log_prob += scores[static_cast<std::size_t>(pick)];
      if (pick == Vocabulary::kEos) break;
    }
    hyp.finished = true;
    hyp.satisfied = true;
    result.hypotheses.push_back(std::move(hyp));
  }
  return result;
}

std::vector<DisjunctiveConstraintSet> parse_constraint_sets(std::string_view json_text,
                                                            const Vocabulary& vocab) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw DataError("constraints must be a JSON list of lists of strings");
  std::vector<DisjunctiveConstraintSet> sets;
  int next_id = 0;
  for (const auto& set_json : j) {
    if (!set_json.is_array() || set_json.empty())
      throw DataError("each constraint set must be a non-empty JSON list");
    DisjunctiveConstraintSet set;
    set.set_id = next_id++;
    for (const auto& item : set_json) {
      if (!item.is_string()) throw DataError("constraint entries must be strings");
      const std::string text = item.get<std::string>();
      std::vector<TokenId> seq;
      std::size_t i = 0;
      while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) i++;
        std::size_t b = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) i++;
        if (i == b) break;
        const std::string word = text.substr(b, i - b);
        if (!vocab.contains(word))
          throw DataError("constraint token not in vocabulary: " + word);
        seq.push_back(vocab.id_or_unk(word));
      }
      if (seq.empty()) throw DataError("constraint string must contain a token: '" + text + "'");
      set.sequences.push_back(std::move(seq));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace causalgen
