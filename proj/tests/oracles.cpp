#include "oracles.hpp"

#include <algorithm>
#include <map>

namespace causalgen::testing {

bool contains_run(std::span<const TokenId> tokens, std::span<const TokenId> seq) {
  if (seq.empty() || seq.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + seq.size() <= tokens.size(); i++) {
    bool match = true;
    for (std::size_t k = 0; k < seq.size(); k++) {
      if (tokens[i + k] != seq[k]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

bool satisfies_all(std::span<const TokenId> tokens,
                   std::span<const DisjunctiveConstraintSet> sets) {
  for (const DisjunctiveConstraintSet& set : sets) {
    bool any = false;
    for (const std::vector<TokenId>& seq : set.sequences) {
      if (contains_run(tokens, seq)) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

namespace {

bool lex_less(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Enumerator {
  const TokenScorer& scorer;
  std::span<const DisjunctiveConstraintSet> sets;
  std::size_t k_max;
  std::vector<TokenId> content_tokens;
  OracleBest best;

  void offer(const std::vector<TokenId>& tokens, double log_prob) {
    if (!satisfies_all(tokens, sets)) return;
    if (!best.found || log_prob > best.log_prob ||
        (log_prob == best.log_prob && lex_less(tokens, best.tokens))) {
      best.found = true;
      best.tokens = tokens;
      best.log_prob = log_prob;
    }
  }

  void walk(std::vector<TokenId>& prefix, double log_prob) {
    if (prefix.size() == k_max) {
      offer(prefix, log_prob);
      return;
    }
    std::vector<double> scores = scorer.score_next(prefix);
    // EOS termination is only reachable when the content so far satisfies
    // every set (the decoder's EOS gate)
    if (satisfies_all(prefix, sets)) {
      std::vector<TokenId> ended = prefix;
      ended.push_back(Vocabulary::kEos);
      offer(ended, log_prob + scores[static_cast<std::size_t>(Vocabulary::kEos)]);
    }
    for (TokenId t : content_tokens) {
      prefix.push_back(t);
      walk(prefix, log_prob + scores[static_cast<std::size_t>(t)]);
      prefix.pop_back();
    }
  }
};

}  // namespace

OracleBest exhaustive_constrained_argmax(const TokenScorer& scorer,
                                         std::span<const DisjunctiveConstraintSet> sets,
                                         std::size_t k_max) {
  Enumerator e{scorer, sets, k_max, {}, {}};
  for (std::size_t t = 0; t < scorer.vocab().size(); t++) {
    TokenId id = static_cast<TokenId>(t);
    if (id == Vocabulary::kBos || id == Vocabulary::kEos || id == Vocabulary::kUnk) continue;
    e.content_tokens.push_back(id);
  }
  std::vector<TokenId> prefix;
  e.walk(prefix, 0.0);
  return e.best;
}

namespace {

struct ConjHypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  std::vector<bool> done;                    // per constraint
  std::vector<std::vector<std::size_t>> at;  // per constraint: active match depths
  int done_count = 0;
  bool satisfied = false;
};

bool conj_beam_less(const ConjHypothesis& a, const ConjHypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return lex_less(a.tokens, b.tokens);
}

bool conj_ranked_less(const ConjHypothesis& a, const ConjHypothesis& b) {
  if (a.satisfied != b.satisfied) return a.satisfied;
  return conj_beam_less(a, b);
}

ConjHypothesis conj_advance(const ConjHypothesis& hyp, TokenId tok,
                            const std::vector<std::vector<TokenId>>& constraints) {
  ConjHypothesis next = hyp;
  next.tokens.push_back(tok);
  for (std::size_t c = 0; c < constraints.size(); c++) {
    if (next.done[c]) continue;
    const std::vector<TokenId>& seq = constraints[c];
    std::vector<std::size_t> depths;
    auto try_depth = [&](std::size_t d) {
      if (seq[d] != tok) return;
      if (d + 1 == seq.size()) {
        if (!next.done[c]) {
          next.done[c] = true;
          next.done_count++;
        }
      } else if (std::find(depths.begin(), depths.end(), d + 1) == depths.end()) {
        depths.push_back(d + 1);
      }
    };
    try_depth(0);
    for (std::size_t d : hyp.at[c]) try_depth(d);
    next.at[c] = next.done[c] ? std::vector<std::size_t>{} : std::move(depths);
  }
  return next;
}

}  // namespace

DecodeResult conjunctive_beam_decode(const TokenScorer& scorer,
                                     const std::vector<std::vector<TokenId>>& constraints,
                                     std::size_t beam_size, std::size_t k_max) {
  const std::size_t n_constraints = constraints.size();
  DecodeResult result;

  ConjHypothesis start;
  start.done.assign(n_constraints, false);
  start.at.assign(n_constraints, {});
  std::vector<ConjHypothesis> beam{start};
  std::vector<ConjHypothesis> finished;

  for (std::size_t step = 1; step <= k_max && !beam.empty(); step++) {
    std::vector<ConjHypothesis> pool;
    for (const ConjHypothesis& hyp : beam) {
      std::vector<double> scores = scorer.score_next(hyp.tokens);
      result.scorer_calls++;
      const bool all_done = hyp.done_count == static_cast<int>(n_constraints);

      std::vector<TokenId> order(scores.size());
      for (std::size_t i = 0; i < order.size(); i++) order[i] = static_cast<TokenId>(i);
      std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
        double sa = scores[static_cast<std::size_t>(a)];
        double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
      });
      std::vector<bool> chosen(scores.size(), false);
      std::vector<TokenId> cand;
      std::size_t taken = 0;
      for (TokenId t : order) {
        if (taken >= beam_size) break;
        if (t == Vocabulary::kBos || t == Vocabulary::kUnk) continue;
        if (t == Vocabulary::kEos && !all_done) continue;
        chosen[static_cast<std::size_t>(t)] = true;
        cand.push_back(t);
        taken++;
      }
      for (std::size_t c = 0; c < n_constraints; c++) {
        if (hyp.done[c]) continue;
        auto add_tok = [&](TokenId t) {
          if (!chosen[static_cast<std::size_t>(t)]) {
            chosen[static_cast<std::size_t>(t)] = true;
            cand.push_back(t);
          }
        };
        add_tok(constraints[c][0]);
        for (std::size_t d : hyp.at[c]) add_tok(constraints[c][d]);
      }
      std::sort(cand.begin(), cand.end());

      for (TokenId tok : cand) {
        if (tok == Vocabulary::kEos) {
          ConjHypothesis done = hyp;
          done.tokens.push_back(tok);
          done.log_prob += scores[static_cast<std::size_t>(tok)];
          done.satisfied = all_done;
          finished.push_back(std::move(done));
          continue;
        }
        ConjHypothesis next = conj_advance(hyp, tok, constraints);
        next.log_prob += scores[static_cast<std::size_t>(tok)];
        if (next.tokens.size() >= k_max) {
          next.satisfied = next.done_count == static_cast<int>(n_constraints);
          finished.push_back(std::move(next));
        } else {
          pool.push_back(std::move(next));
        }
      }
    }
    if (pool.empty()) break;

    // banked selection keyed by number of satisfied constraints
    std::map<int, std::vector<ConjHypothesis*>> banks;
    for (ConjHypothesis& h : pool) banks[h.done_count].push_back(&h);
    for (auto& [count, bank] : banks)
      std::sort(bank.begin(), bank.end(),
                [](const ConjHypothesis* a, const ConjHypothesis* b) {
                  return conj_beam_less(*a, *b);
                });
    const std::size_t b = banks.size();
    std::vector<std::vector<ConjHypothesis*>*> ordered;
    for (auto& [count, bank] : banks) ordered.push_back(&bank);
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
      take[i] = std::min(slots[i], ordered[i]->size());
      used += take[i];
    }
    std::size_t leftover = beam_size > used ? beam_size - used : 0;
    for (std::size_t i = b; i-- > 0 && leftover > 0;) {
      std::size_t extra = std::min(leftover, ordered[i]->size() - take[i]);
      take[i] += extra;
      leftover -= extra;
    }
    std::vector<ConjHypothesis> next_beam;
    for (std::size_t i = 0; i < b; i++)
      for (std::size_t k = 0; k < take[i]; k++)
        next_beam.push_back(std::move(*(*ordered[i])[k]));
    beam = std::move(next_beam);
  }

  std::sort(finished.begin(), finished.end(), conj_ranked_less);
  bool any_satisfied = !finished.empty() && finished.front().satisfied;
  for (const ConjHypothesis& h : finished) {
    if (any_satisfied && !h.satisfied) break;
    Hypothesis out;
    out.tokens = h.tokens;
    out.log_prob = h.log_prob;
    out.finished = true;
    out.satisfied = h.satisfied;
    result.hypotheses.push_back(std::move(out));
  }
  return result;
}

CauseEffectGraph::EdgeMap brute_count_edges(const std::vector<CausalPair>& pairs,
                                            const Lexicon& lexicon) {
  CauseEffectGraph::EdgeMap counts;
  for (const CausalPair& pair : pairs)
    for (const CauseEffectGraph::Edge& e : extract_lexical_pairs(pair, lexicon)) counts[e]++;
  return counts;
}

}  // namespace causalgen::testing
