#include "causalgen/ceg.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "causalgen/errors.hpp"
#include "causalgen/io.hpp"

namespace causalgen {

namespace {

constexpr char kTsvHeader[] = "#ceg\t1";
constexpr char kIdxMagic[4] = {'C', 'E', 'G', 'X'};
constexpr std::uint32_t kIdxVersion = 1;

bool weighted_less(const WeightedLemma& a, const WeightedLemma& b) {
  if (a.freq != b.freq) return a.freq > b.freq;
  return a.lemma < b.lemma;
}

}  // namespace

CauseEffectGraph CauseEffectGraph::from_counts(EdgeMap counts, std::uint64_t threshold) {
  CauseEffectGraph g;
  for (auto& [edge, freq] : counts) {
    if (freq > threshold) g.edges_.emplace(edge, freq);
  }
  g.build_indices();
  return g;
}

void CauseEffectGraph::build_indices() {
  out_index_.clear();
  in_index_.clear();
  for (const auto& [edge, freq] : edges_) {
    out_index_[edge.first].push_back(WeightedLemma{edge.second, freq});
    in_index_[edge.second].push_back(WeightedLemma{edge.first, freq});
  }
  for (auto& [lemma, list] : out_index_) std::sort(list.begin(), list.end(), weighted_less);
  for (auto& [lemma, list] : in_index_) std::sort(list.begin(), list.end(), weighted_less);
}

std::uint64_t CauseEffectGraph::edge_freq(const std::string& cause,
                                          const std::string& effect) const {
  auto it = edges_.find(Edge{cause, effect});
  return it == edges_.end() ? 0 : it->second;
}

std::size_t CauseEffectGraph::node_count() const {
  std::set<std::string> nodes;
  for (const auto& [edge, freq] : edges_) {
    nodes.insert(edge.first);
    nodes.insert(edge.second);
  }
  return nodes.size();
}

const std::vector<WeightedLemma>* CauseEffectGraph::out_edges(
    const std::string& cause_lemma) const {
  auto it = out_index_.find(cause_lemma);
  return it == out_index_.end() ? nullptr : &it->second;
}

const std::vector<WeightedLemma>* CauseEffectGraph::in_edges(
    const std::string& effect_lemma) const {
  auto it = in_index_.find(effect_lemma);
  return it == in_index_.end() ? nullptr : &it->second;
}

namespace {

void append_u32(std::string& s, std::uint32_t v) { s.append(reinterpret_cast<char*>(&v), 4); }
void append_u64(std::string& s, std::uint64_t v) { s.append(reinterpret_cast<char*>(&v), 8); }

std::uint32_t read_u32(const std::string& s, std::size_t& pos) {
  if (pos + 4 > s.size()) throw DataError("truncated graph index");
  std::uint32_t v;
  std::memcpy(&v, s.data() + pos, 4);
  pos += 4;
  return v;
}

std::uint64_t read_u64(const std::string& s, std::size_t& pos) {
  if (pos + 8 > s.size()) throw DataError("truncated graph index");
  std::uint64_t v;
  std::memcpy(&v, s.data() + pos, 8);
  pos += 8;
  return v;
}

}  // namespace

void CauseEffectGraph::save(const std::string& path) const {
  std::string tsv = kTsvHeader;
  tsv += '\n';
  for (const auto& [edge, freq] : edges_) {
    tsv += edge.first;
    tsv += '\t';
    tsv += edge.second;
    tsv += '\t';
    tsv += std::to_string(freq);
    tsv += '\n';
  }
  write_file(path, tsv);

  // Binary index: string table of nodes plus (cause, effect, freq) triples
  // over table offsets. Node ids are the sorted order of the node set.
  std::vector<std::string> nodes;
  {
    std::set<std::string> node_set;
    for (const auto& [edge, freq] : edges_) {
      node_set.insert(edge.first);
      node_set.insert(edge.second);
    }
    nodes.assign(node_set.begin(), node_set.end());
  }
  std::unordered_map<std::string, std::uint32_t> node_id;
  for (std::uint32_t i = 0; i < nodes.size(); i++) node_id[nodes[i]] = i;

  std::string bin(kIdxMagic, sizeof kIdxMagic);
  append_u32(bin, kIdxVersion);
  append_u64(bin, nodes.size());
  append_u64(bin, edges_.size());
  for (const std::string& n : nodes) {
    append_u32(bin, static_cast<std::uint32_t>(n.size()));
    bin += n;
  }
  for (const auto& [edge, freq] : edges_) {
    append_u32(bin, node_id.at(edge.first));
    append_u32(bin, node_id.at(edge.second));
    append_u64(bin, freq);
  }
  write_file(path + ".idx", bin);
}

CauseEffectGraph CauseEffectGraph::load(const std::string& path) {
  const std::string idx_path = path + ".idx";
  if (FILE* probe = std::fopen(idx_path.c_str(), "rb")) {
    std::fclose(probe);
    std::string bin = read_file(idx_path);
    if (bin.size() < 8 || std::memcmp(bin.data(), kIdxMagic, sizeof kIdxMagic) != 0)
      throw DataError("bad magic in graph index: " + idx_path);
    std::size_t pos = sizeof kIdxMagic;
    if (read_u32(bin, pos) != kIdxVersion)
      throw DataError("unsupported graph index version: " + idx_path);
    std::uint64_t n_nodes = read_u64(bin, pos);
    std::uint64_t n_edges = read_u64(bin, pos);
    std::vector<std::string> nodes;
    nodes.reserve(n_nodes);
    for (std::uint64_t i = 0; i < n_nodes; i++) {
      std::uint32_t len = read_u32(bin, pos);
      if (pos + len > bin.size()) throw DataError("truncated graph index");
      nodes.emplace_back(bin, pos, len);
      pos += len;
    }
    CauseEffectGraph g;
    for (std::uint64_t i = 0; i < n_edges; i++) {
      std::uint32_t c = read_u32(bin, pos);
      std::uint32_t e = read_u32(bin, pos);
      std::uint64_t f = read_u64(bin, pos);
      if (c >= nodes.size() || e >= nodes.size()) throw DataError("corrupt graph index");
      g.edges_.emplace(Edge{nodes[c], nodes[e]}, f);
    }
    g.build_indices();
    return g;
  }

  // TSV fallback
  std::string tsv = read_file(path);
  std::istringstream in(tsv);
  std::string line;
  if (!std::getline(in, line) || (line != kTsvHeader && line != std::string(kTsvHeader) + "\r"))
    throw DataError("bad graph file header: " + path);
  CauseEffectGraph g;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed edge line");
    g.edges_.emplace(Edge{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)},
                     std::stoull(line.substr(t2 + 1)));
  }
  g.build_indices();
  return g;
}

std::uint64_t CauseEffectGraph::content_hash() const {
  // FNV-1a over the sorted edge list
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [edge, freq] : edges_) {
    mix(edge.first);
    mix(edge.second);
    mix(std::to_string(freq));
  }
  return h;
}

namespace {

bool has_letter(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

std::set<std::string> content_lemmas(std::string_view text, const Lexicon& lexicon) {
  std::set<std::string> out;
  for (const Token& t : tokenize(text)) {
    if (t.is_punct || !has_letter(t.lower)) continue;
    if (!lexicon.is_open_class(t.lower)) continue;
    out.insert(lexicon.lemmatize(t.lower));
  }
  return out;
}

}  // namespace

std::set<CauseEffectGraph::Edge> extract_lexical_pairs(const CausalPair& pair,
                                                       const Lexicon& lexicon) {
  std::set<CauseEffectGraph::Edge> out;
  std::set<std::string> cause_lemmas = content_lemmas(pair.cause, lexicon);
  if (cause_lemmas.empty()) return out;
  std::set<std::string> effect_lemmas = content_lemmas(pair.effect, lexicon);
  for (const std::string& c : cause_lemmas)
    for (const std::string& e : effect_lemmas) out.emplace(c, e);
  return out;
}

CauseEffectGraph build_graph(const std::vector<CausalPair>& pairs, std::uint64_t threshold,
                             const Lexicon& lexicon, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, 64);

  std::vector<CauseEffectGraph::EdgeMap> shard_counts(threads);
  auto worker = [&](unsigned tid) {
    CauseEffectGraph::EdgeMap& counts = shard_counts[tid];
    for (std::size_t i = tid; i < pairs.size(); i += threads) {
      for (const CauseEffectGraph::Edge& e : extract_lexical_pairs(pairs[i], lexicon))
        counts[e]++;
    }
  };
  if (threads <= 1 || pairs.size() <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  CauseEffectGraph::EdgeMap total;
  for (const auto& shard : shard_counts)
    for (const auto& [edge, n] : shard) total[edge] += n;
  return CauseEffectGraph::from_counts(std::move(total), threshold);
}

std::vector<WeightedLemma> query_candidates(const CauseEffectGraph& graph,
                                            const std::set<std::string>& input_lemmas,
                                            GraphDirection direction, std::size_t n) {
  if (n < 1) throw std::invalid_argument("query_candidates: n must be >= 1");
  std::map<std::string, std::uint64_t> sums;
  for (const std::string& lemma : input_lemmas) {
    const std::vector<WeightedLemma>* list = direction == GraphDirection::CauseOf
                                                 ? graph.in_edges(lemma)
                                                 : graph.out_edges(lemma);
    if (!list) continue;
    for (const WeightedLemma& w : *list) {
      if (input_lemmas.count(w.lemma)) continue;
      sums[w.lemma] += w.freq;
    }
  }
  std::vector<WeightedLemma> out;
  out.reserve(sums.size());
  for (const auto& [lemma, freq] : sums) out.push_back(WeightedLemma{lemma, freq});
  std::sort(out.begin(), out.end(), weighted_less);
  if (out.size() > n) out.resize(n);
  return out;
}

}  // namespace causalgen
