// Token scoring: the pluggable autoregressive scorer contract, a smoothed
// n-gram reference model, and the evaluation / loss formulas.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace causalgen {

using TokenId = std::int32_t;

class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;

  Vocabulary();  // specials only

  // Specials first, then unique corpus tokens in first-occurrence order.
  static Vocabulary from_corpus(const std::vector<std::vector<std::string>>& sentences);
  static Vocabulary from_token_file(const std::string& path);

  TokenId add(std::string_view token);         // no-op when present
  TokenId id_or_unk(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }

  std::vector<TokenId> encode(std::span<const std::string> words) const;

  void save(const std::string& path) const;  // newline-delimited tokens

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Autoregressive scorer: log-probabilities over the full vocabulary for the
// next position. Implementations must be deterministic for a fixed prefix
// and normalized (exp sums to 1 within 1e-9).
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual const Vocabulary& vocab() const = 0;
  virtual std::vector<double> score_next(std::span<const TokenId> prefix) const = 0;
};

// Counts every score_next call; used by the efficiency measurements.
class CountingScorer : public TokenScorer {
 public:
  explicit CountingScorer(const TokenScorer& inner) : inner_(inner) {}
  const Vocabulary& vocab() const override { return inner_.vocab(); }
  std::vector<double> score_next(std::span<const TokenId> prefix) const override {
    calls_++;
    return inner_.score_next(prefix);
  }
  std::uint64_t calls() const { return calls_; }
  void reset() { calls_ = 0; }

 private:
  const TokenScorer& inner_;
  mutable std::uint64_t calls_ = 0;
};

// Laplace-smoothed n-gram model with back-off to the longest history suffix
// that has been observed:  P(w|h) = (count(h,w) + a) / (count(h) + a*|V|).
class NGramModel : public TokenScorer {
 public:
  NGramModel() = default;
  NGramModel(Vocabulary vocab, int order, double alpha);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> score_next(std::span<const TokenId> prefix) const override;
  double log_prob(std::span<const TokenId> prefix, TokenId next) const;

  int order() const { return order_; }
  double alpha() const { return alpha_; }

  void observe(std::span<const TokenId> sentence);  // counts sentence + EOS

  void save(const std::string& path) const;  // versioned binary + .vocab file
  static NGramModel load(const std::string& path);

 private:
  struct HistoryEntry {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> counts;
  };

  const HistoryEntry* find_history(std::span<const TokenId> history) const;

  Vocabulary vocab_;
  int order_ = 1;
  double alpha_ = 1.0;
  // counts_[k]: histories of length k
  std::vector<std::map<std::vector<TokenId>, HistoryEntry>> counts_;
};

// Trains on whitespace-pretokenized sentences; vocabulary is built from the
// corpus unless one is supplied. Empty corpus trains a uniform model.
NGramModel train_ngram(const std::vector<std::vector<std::string>>& corpus, int order,
                       double alpha);
NGramModel train_ngram(const std::vector<std::vector<std::string>>& corpus, int order,
                       double alpha, Vocabulary vocab);

// exp(-(1/T) * sum log P(token | prefix)) over all positions including EOS.
double perplexity(const TokenScorer& model, const std::vector<std::vector<std::string>>& corpus);

// Fraction of positions where the scorer argmax (ties to the smallest token
// id) equals the reference token.
double word_accuracy(const TokenScorer& model,
                     const std::vector<std::vector<std::string>>& corpus);

// sum_i max(0, m - pos_i + neg_i) + (lambda/2) * param_norm_sq
double margin_ranking_loss(std::span<const double> pos_scores,
                           std::span<const double> neg_scores, double margin, double lambda,
                           double param_norm_sq);

}  // namespace causalgen
