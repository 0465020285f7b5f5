#include "causalgen/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "causalgen/errors.hpp"
#include "causalgen/io.hpp"

namespace causalgen {

Vocabulary::Vocabulary() {
  add("<s>");
  add("</s>");
  add("<unk>");
}

Vocabulary Vocabulary::from_corpus(const std::vector<std::vector<std::string>>& sentences) {
  Vocabulary v;
  for (const auto& sent : sentences)
    for (const std::string& w : sent) v.add(w);
  return v;
}

Vocabulary Vocabulary::from_token_file(const std::string& path) {
  Vocabulary v;
  std::vector<std::string> lines = read_all_lines(path);
  if (lines.size() < 3 || lines[0] != "<s>" || lines[1] != "</s>" || lines[2] != "<unk>")
    throw DataError("vocabulary file must start with <s>, </s>, <unk>: " + path);
  for (std::size_t i = 3; i < lines.size(); i++) {
    if (lines[i].empty()) continue;
    if (v.contains(lines[i])) throw DataError("duplicate vocabulary token: " + lines[i]);
    v.add(lines[i]);
  }
  return v;
}

TokenId Vocabulary::add(std::string_view token) {
  std::string key(token);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  TokenId id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

TokenId Vocabulary::id_or_unk(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw std::out_of_range("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const std::string& w : words) out.push_back(id_or_unk(w));
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::string out;
  for (const std::string& t : tokens_) {
    out += t;
    out += '\n';
  }
  write_file(path, out);
}

NGramModel::NGramModel(Vocabulary vocab, int order, double alpha)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");
  counts_.resize(static_cast<std::size_t>(order));
}

void NGramModel::observe(std::span<const TokenId> sentence) {
  std::vector<TokenId> context(static_cast<std::size_t>(order_ - 1), Vocabulary::kBos);
  auto count_token = [&](TokenId w) {
    for (int k = 0; k < order_; k++) {
      std::vector<TokenId> history(context.end() - k, context.end());
      HistoryEntry& e = counts_[static_cast<std::size_t>(k)][history];
      e.total++;
      e.counts[w]++;
    }
    if (order_ > 1) {
      context.erase(context.begin());
      context.push_back(w);
    }
  };
  for (TokenId w : sentence) count_token(w);
  count_token(Vocabulary::kEos);
}

const NGramModel::HistoryEntry* NGramModel::find_history(
    std::span<const TokenId> history) const {
  std::vector<TokenId> key(history.begin(), history.end());
  const auto& table = counts_[key.size()];
  auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

std::vector<double> NGramModel::score_next(std::span<const TokenId> prefix) const {
  const std::size_t v = vocab_.size();
  // history = last (order-1) tokens of the BOS-padded prefix
  std::vector<TokenId> history;
  {
    const std::size_t want = static_cast<std::size_t>(order_ - 1);
    for (std::size_t i = prefix.size() > want ? prefix.size() - want : 0; i < prefix.size(); i++)
      history.push_back(prefix[i]);
    while (history.size() < want) history.insert(history.begin(), Vocabulary::kBos);
  }
  // back off to the longest observed suffix; the empty history always applies
  const HistoryEntry* entry = nullptr;
  for (std::size_t len = history.size();; len--) {
    std::span<const TokenId> h(history.data() + (history.size() - len), len);
    entry = find_history(h);
    if (entry && entry->total > 0) break;
    if (len == 0) break;
  }
  static const HistoryEntry kEmpty;
  if (!entry) entry = &kEmpty;

  const double denom = static_cast<double>(entry->total) + alpha_ * static_cast<double>(v);
  std::vector<double> out(v);
  for (std::size_t w = 0; w < v; w++) {
    auto it = entry->counts.find(static_cast<TokenId>(w));
    const double c = it == entry->counts.end() ? 0.0 : static_cast<double>(it->second);
    out[w] = std::log((c + alpha_) / denom);
  }
  return out;
}

double NGramModel::log_prob(std::span<const TokenId> prefix, TokenId next) const {
  return score_next(prefix)[static_cast<std::size_t>(next)];
}

namespace {

constexpr char kModelMagic[4] = {'N', 'G', 'L', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void append_u32(std::string& s, std::uint32_t x) { s.append(reinterpret_cast<char*>(&x), 4); }
void append_u64(std::string& s, std::uint64_t x) { s.append(reinterpret_cast<char*>(&x), 8); }
void append_f64(std::string& s, double x) { s.append(reinterpret_cast<char*>(&x), 8); }
void append_i32(std::string& s, std::int32_t x) { s.append(reinterpret_cast<char*>(&x), 4); }

struct BinReader {
  const std::string& s;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > s.size()) throw DataError("truncated model file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, s.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, s.data() + pos, 8);
    pos += 8;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, s.data() + pos, 8);
    pos += 8;
    return v;
  }
  std::int32_t i32() {
    need(4);
    std::int32_t v;
    std::memcpy(&v, s.data() + pos, 4);
    pos += 4;
    return v;
  }
};

}  // namespace

void NGramModel::save(const std::string& path) const {
  std::string bin(kModelMagic, sizeof kModelMagic);
  append_u32(bin, kModelVersion);
  append_u32(bin, static_cast<std::uint32_t>(order_));
  append_f64(bin, alpha_);
  for (int k = 0; k < order_; k++) {
    const auto& table = counts_[static_cast<std::size_t>(k)];
    append_u64(bin, table.size());
    for (const auto& [history, entry] : table) {
      for (TokenId id : history) append_i32(bin, id);
      append_u64(bin, entry.total);
      append_u64(bin, entry.counts.size());
      for (const auto& [id, n] : entry.counts) {
        append_i32(bin, id);
        append_u64(bin, n);
      }
    }
  }
  write_file(path, bin);
  vocab_.save(path + ".vocab");
}

NGramModel NGramModel::load(const std::string& path) {
  std::string bin = read_file(path);
  if (bin.size() < 8 || std::memcmp(bin.data(), kModelMagic, sizeof kModelMagic) != 0)
    throw DataError("bad magic in model file: " + path);
  BinReader r{bin, sizeof kModelMagic};
  if (r.u32() != kModelVersion) throw DataError("unsupported model version: " + path);
  const int order = static_cast<int>(r.u32());
  const double alpha = r.f64();
  NGramModel model(Vocabulary::from_token_file(path + ".vocab"), order, alpha);
  for (int k = 0; k < order; k++) {
    std::uint64_t n_hist = r.u64();
    auto& table = model.counts_[static_cast<std::size_t>(k)];
    for (std::uint64_t i = 0; i < n_hist; i++) {
      std::vector<TokenId> history(static_cast<std::size_t>(k));
      for (auto& id : history) id = r.i32();
      HistoryEntry entry;
      entry.total = r.u64();
      std::uint64_t n_tok = r.u64();
      for (std::uint64_t t = 0; t < n_tok; t++) {
        TokenId id = r.i32();
        entry.counts[id] = r.u64();
      }
      table.emplace(std::move(history), std::move(entry));
    }
  }
  return model;
}

NGramModel train_ngram(const std::vector<std::vector<std::string>>& corpus, int order,
                       double alpha) {
  return train_ngram(corpus, order, alpha, Vocabulary::from_corpus(corpus));
}

NGramModel train_ngram(const std::vector<std::vector<std::string>>& corpus, int order,
                       double alpha, Vocabulary vocab) {
  NGramModel model(std::move(vocab), order, alpha);
  for (const auto& sent : corpus) {
    std::vector<TokenId> ids = model.vocab().encode(sent);
    model.observe(ids);
  }
  return model;
}

namespace {

template <typename PerPosition>
void scan_corpus(const TokenScorer& model, const std::vector<std::vector<std::string>>& corpus,
                 PerPosition&& per_position) {
  if (corpus.empty()) throw std::invalid_argument("corpus must be non-empty");
  for (const auto& sent : corpus) {
    std::vector<TokenId> ids = model.vocab().encode(sent);
    ids.push_back(Vocabulary::kEos);
    std::vector<TokenId> prefix;
    for (TokenId ref : ids) {
      per_position(model.score_next(prefix), ref);
      prefix.push_back(ref);
    }
  }
}

}  // namespace

double perplexity(const TokenScorer& model,
                  const std::vector<std::vector<std::string>>& corpus) {
  double log_sum = 0.0;
  std::uint64_t positions = 0;
  scan_corpus(model, corpus, [&](const std::vector<double>& scores, TokenId ref) {
    log_sum += scores[static_cast<std::size_t>(ref)];
    positions++;
  });
  return std::exp(-log_sum / static_cast<double>(positions));
}

double word_accuracy(const TokenScorer& model,
                     const std::vector<std::vector<std::string>>& corpus) {
  std::uint64_t hits = 0, positions = 0;
  scan_corpus(model, corpus, [&](const std::vector<double>& scores, TokenId ref) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); i++)
      if (scores[i] > scores[best]) best = i;  // ties keep the smallest id
    if (static_cast<TokenId>(best) == ref) hits++;
    positions++;
  });
  return static_cast<double>(hits) / static_cast<double>(positions);
}

double margin_ranking_loss(std::span<const double> pos_scores,
                           std::span<const double> neg_scores, double margin, double lambda,
                           double param_norm_sq) {
  if (pos_scores.size() != neg_scores.size())
    throw std::invalid_argument("margin_ranking_loss: score lists differ in length");
  double loss = 0.0;
  for (std::size_t i = 0; i < pos_scores.size(); i++)
    loss += std::max(0.0, margin - pos_scores[i] + neg_scores[i]);
  return loss + 0.5 * lambda * param_norm_sq;
}

}  // namespace causalgen
