#include "causalgen/miner.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "causalgen/data_tables.hpp"
#include "causalgen/errors.hpp"
#include "causalgen/io.hpp"

namespace causalgen {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(PatternCategory c) {
  return c == PatternCategory::EPC ? "EPC" : "CPE";
}

PatternCategory category_from_string(std::string_view s) {
  if (s == "EPC") return PatternCategory::EPC;
  if (s == "CPE") return PatternCategory::CPE;
  throw DataError("unknown pattern category: " + std::string(s));
}

namespace {

SemanticClass semantic_class_from_string(std::string_view s) {
  if (s == "CAUSE") return SemanticClass::Cause;
  if (s == "EXPLANATION") return SemanticClass::Explanation;
  if (s == "CONDITION") return SemanticClass::Condition;
  if (s == "PURPOSE") return SemanticClass::Purpose;
  if (s == "PREVENTION") return SemanticClass::Prevention;
  throw DataError("unknown semantic class: " + std::string(s));
}

std::string trim_ws(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) b++;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) e--;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<CausalPattern> parse_patterns_tsv(std::string_view tsv) {
  std::vector<CausalPattern> out;
  std::unordered_set<std::string> seen_ids;
  std::istringstream in{std::string(tsv)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) throw DataError("malformed pattern line: " + line);
    CausalPattern p;
    p.surface = trim_ws(cols[0]);
    if (p.surface.empty()) throw DataError("empty pattern surface: " + line);
    for (const Token& t : tokenize(p.surface)) p.surface_tokens.push_back(t.lower);
    if (p.surface_tokens.empty()) throw DataError("untokenizable pattern surface: " + line);
    p.category = category_from_string(trim_ws(cols[1]));
    p.semantic_class = semantic_class_from_string(trim_ws(cols[2]));
    p.id = trim_ws(cols[3]);
    if (p.id.empty() || !seen_ids.insert(p.id).second)
      throw DataError("missing or duplicate pattern id: " + line);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CausalPattern> load_patterns_tsv(const std::string& path) {
  return parse_patterns_tsv(read_file(path));
}

const std::vector<CausalPattern>& default_patterns() {
  static const std::vector<CausalPattern> patterns = parse_patterns_tsv(builtin_patterns_tsv());
  return patterns;
}

MinerConfig MinerConfig::defaults() {
  MinerConfig cfg;
  cfg.patterns = default_patterns();
  return cfg;
}

namespace {

struct Occurrence {
  const CausalPattern* pattern;
  std::size_t begin;
  std::size_t end;
};

// All occurrences, longest surface first; overlapping shorter occurrences
// are dropped so nested patterns ("because of" over "because") resolve to
// the longest surface.
std::vector<Occurrence> surviving_occurrences(const std::vector<Token>& tokens,
                                              const MinerConfig& config) {
  std::vector<Occurrence> all;
  for (const CausalPattern& p : config.patterns) {
    const auto& pt = p.surface_tokens;
    if (pt.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + pt.size() <= tokens.size(); i++) {
      bool match = true;
      for (std::size_t k = 0; k < pt.size(); k++) {
        if (tokens[i + k].lower != pt[k]) {
          match = false;
          break;
        }
      }
      if (match) all.push_back(Occurrence{&p, i, i + pt.size()});
    }
  }
  std::sort(all.begin(), all.end(), [](const Occurrence& a, const Occurrence& b) {
    std::size_t la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.pattern->id < b.pattern->id;
  });
  std::vector<Occurrence> kept;
  for (const Occurrence& o : all) {
    bool overlaps = false;
    for (const Occurrence& k : kept) {
      if (o.begin < k.end && k.begin < o.end) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) kept.push_back(o);
  }
  return kept;
}

void trim_punct(const std::vector<Token>& tokens, std::size_t& begin, std::size_t& end) {
  while (begin < end && tokens[begin].is_punct) begin++;
  while (end > begin && tokens[end - 1].is_punct) end--;
}

PatternMatch build_match(const std::vector<Token>& sentence, const Occurrence& o) {
  PatternMatch m;
  m.pattern = o.pattern;
  m.pattern_begin = o.begin;
  m.pattern_end = o.end;
  m.left_begin = 0;
  m.left_end = o.begin;
  m.right_begin = o.end;
  m.right_end = sentence.size();
  trim_punct(sentence, m.left_begin, m.left_end);
  trim_punct(sentence, m.right_begin, m.right_end);
  return m;
}

}  // namespace

std::optional<PatternMatch> match_pattern(const std::vector<Token>& sentence,
                                          const MinerConfig& config) {
  std::vector<Occurrence> kept = surviving_occurrences(sentence, config);
  if (kept.size() != 1) return std::nullopt;
  return build_match(sentence, kept.front());
}

std::string span_text(std::string_view source, const std::vector<Token>& tokens,
                      std::size_t begin, std::size_t end) {
  if (begin >= end) return {};
  std::size_t b = tokens[begin].begin;
  std::size_t e = tokens[end - 1].end;
  return std::string(source.substr(b, e - b));
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::TooShort: return "too_short";
    case RejectReason::Negation: return "negation";
    case RejectReason::Passive: return "passive";
  }
  return "unknown";
}

namespace {

const std::unordered_set<std::string>& negation_cues() {
  static const std::unordered_set<std::string> cues = {"not", "n't", "never", "no", "cannot"};
  return cues;
}

const std::unordered_set<std::string>& be_forms() {
  static const std::unordered_set<std::string> forms = {"be",   "am",    "is",  "are",
                                                        "was",  "were",  "been", "being",
                                                        "'s",   "'re",   "'m"};
  return forms;
}

// Irregular participles that the -ed/-en suffix rule misses.
const std::unordered_set<std::string>& irregular_participles() {
  static const std::unordered_set<std::string> parts = {
      "brought", "bought", "built",  "caught", "cut",   "dealt", "done",  "drawn",
      "drunk",   "felt",   "fought", "found",  "gone",  "heard", "held",  "hit",
      "hurt",    "kept",   "laid",   "led",    "left",  "lost",  "made",  "meant",
      "met",     "paid",   "put",    "read",   "said",  "sent",  "set",   "shot",
      "shut",    "sold",   "sung",   "sunk",   "sat",   "slept", "spent", "stood",
      "struck",  "stuck",  "swum",   "taught", "told",  "thought", "understood",
      "won",     "begun",  "hung",   "sprung", "torn",  "worn",  "sworn", "born",
  };
  return parts;
}

bool has_letter(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

bool looks_like_participle(const std::string& lower) {
  if (irregular_participles().count(lower)) return true;
  if (lower.size() < 4 || !has_letter(lower)) return false;
  auto ends = [&](std::string_view suf) {
    return lower.size() >= suf.size() &&
           std::string_view(lower).substr(lower.size() - suf.size()) == suf;
  };
  return ends("ed") || ends("en");
}

bool has_negation_cue(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end && i < tokens.size(); i++)
    if (negation_cues().count(tokens[i].lower)) return true;
  return false;
}

bool has_passive(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; i++) {
    if (!be_forms().count(tokens[i].lower)) continue;
    for (std::size_t k = i + 1; k <= i + 2 && k < end; k++) {
      if (looks_like_participle(tokens[k].lower)) return true;
    }
  }
  return false;
}

FilterDecision run_filters(const std::vector<Token>& sentence_tokens,
                           const std::optional<PatternMatch>& match,
                           const std::vector<Token>& cause_tokens,
                           const std::vector<Token>& effect_tokens, const MinerConfig& config) {
  if (config.min_arg_tokens < 1)
    throw std::invalid_argument("min_arg_tokens must be >= 1");
  const auto min_tokens = static_cast<std::size_t>(config.min_arg_tokens);
  if (cause_tokens.size() < min_tokens || effect_tokens.size() < min_tokens)
    return {false, RejectReason::TooShort};

  if (config.enable_negation_filter) {
    const auto window = static_cast<std::size_t>(config.negation_window);
    if (match) {
      std::size_t wb = match->pattern_begin > window ? match->pattern_begin - window : 0;
      if (has_negation_cue(sentence_tokens, wb, match->pattern_begin))
        return {false, RejectReason::Negation};
    }
    if (has_negation_cue(cause_tokens, 0, std::min(window, cause_tokens.size())) ||
        has_negation_cue(effect_tokens, 0, std::min(window, effect_tokens.size())))
      return {false, RejectReason::Negation};
  }

  if (config.enable_passive_filter) {
    if (has_passive(cause_tokens, 0, cause_tokens.size()) ||
        has_passive(effect_tokens, 0, effect_tokens.size()))
      return {false, RejectReason::Passive};
  }
  return {true, RejectReason::TooShort};
}

}  // namespace

FilterDecision apply_filters(const CausalPair& candidate, const MinerConfig& config) {
  std::vector<Token> sentence_tokens = tokenize(candidate.source_sentence);
  std::optional<PatternMatch> match = match_pattern(sentence_tokens, config);
  std::vector<Token> cause_tokens = tokenize(candidate.cause);
  std::vector<Token> effect_tokens = tokenize(candidate.effect);
  return run_filters(sentence_tokens, match, cause_tokens, effect_tokens, config);
}

void MiningStats::merge(const MiningStats& other) {
  documents += other.documents;
  malformed_documents += other.malformed_documents;
  sentences += other.sentences;
  no_pattern += other.no_pattern;
  ambiguous += other.ambiguous;
  rejected_too_short += other.rejected_too_short;
  rejected_negation += other.rejected_negation;
  rejected_passive += other.rejected_passive;
  duplicates += other.duplicates;
  accepted += other.accepted;
  epc += other.epc;
  cpe += other.cpe;
  for (const auto& [id, n] : other.per_pattern) per_pattern[id] += n;
}

std::string pair_dedup_key(const CausalPair& pair) {
  auto normalize = [](std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
      if (std::isspace(c)) {
        pending_space = !out.empty();
        continue;
      }
      if (pending_space) {
        out += ' ';
        pending_space = false;
      }
      out += static_cast<char>(std::tolower(c));
    }
    return out;
  };
  return normalize(pair.cause) + '\x1f' + normalize(pair.effect);
}

namespace {

// Extraction over one document; dedup happens in the merge stage.
void mine_one_document(const std::string& doc, const MinerConfig& config,
                       std::vector<CausalPair>& pairs, MiningStats& stats) {
  stats.documents++;
  if (!utf8_valid(doc)) {
    stats.malformed_documents++;
    return;
  }
  for (const Sentence& sentence : split_sentences(doc)) {
    stats.sentences++;
    std::vector<Token> tokens = tokenize(sentence.text);
    std::vector<Occurrence> kept = surviving_occurrences(tokens, config);
    if (kept.empty()) {
      stats.no_pattern++;
      continue;
    }
    if (kept.size() > 1) {
      stats.ambiguous++;
      continue;
    }
    std::optional<PatternMatch> match = build_match(tokens, kept.front());
    const PatternMatch& m = *match;

    CausalPair pair;
    pair.pattern_id = m.pattern->id;
    pair.direction = m.pattern->category;
    pair.source_sentence = sentence.text;
    pair.source_offset = sentence.offset;
    std::string left = span_text(sentence.text, tokens, m.left_begin, m.left_end);
    std::string right = span_text(sentence.text, tokens, m.right_begin, m.right_end);
    if (m.pattern->category == PatternCategory::EPC) {
      pair.effect = std::move(left);
      pair.cause = std::move(right);
    } else {
      pair.cause = std::move(left);
      pair.effect = std::move(right);
    }

    std::vector<Token> cause_tokens(tokens.begin() + (pair.direction == PatternCategory::EPC
                                                          ? m.right_begin
                                                          : m.left_begin),
                                    tokens.begin() + (pair.direction == PatternCategory::EPC
                                                          ? m.right_end
                                                          : m.left_end));
    std::vector<Token> effect_tokens(tokens.begin() + (pair.direction == PatternCategory::EPC
                                                           ? m.left_begin
                                                           : m.right_begin),
                                     tokens.begin() + (pair.direction == PatternCategory::EPC
                                                           ? m.left_end
                                                           : m.right_end));
    FilterDecision fd = run_filters(tokens, match, cause_tokens, effect_tokens, config);
    if (!fd.accept) {
      switch (fd.reason) {
        case RejectReason::TooShort: stats.rejected_too_short++; break;
        case RejectReason::Negation: stats.rejected_negation++; break;
        case RejectReason::Passive: stats.rejected_passive++; break;
      }
      continue;
    }
    pairs.push_back(std::move(pair));
  }
}

}  // namespace

MiningResult mine_documents(const std::vector<std::string>& documents,
                            const MinerConfig& config, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, 64);

  // One slot per document keeps the merge order independent of scheduling.
  std::vector<std::vector<CausalPair>> doc_pairs(documents.size());
  std::vector<MiningStats> doc_stats(documents.size());

  auto worker = [&](unsigned tid) {
    for (std::size_t i = tid; i < documents.size(); i += threads)
      mine_one_document(documents[i], config, doc_pairs[i], doc_stats[i]);
  };
  if (threads <= 1 || documents.size() <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  MiningResult result;
  for (const MiningStats& s : doc_stats) result.stats.merge(s);
  std::unordered_set<std::string> seen;
  for (std::vector<CausalPair>& dp : doc_pairs) {
    for (CausalPair& p : dp) {
      if (!seen.insert(pair_dedup_key(p)).second) {
        result.stats.duplicates++;
        continue;
      }
      result.stats.accepted++;
      result.stats.per_pattern[p.pattern_id]++;
      if (p.direction == PatternCategory::EPC)
        result.stats.epc++;
      else
        result.stats.cpe++;
      result.pairs.push_back(std::move(p));
    }
  }
  return result;
}

std::string pairs_to_jsonl(const std::vector<CausalPair>& pairs) {
  std::string out;
  for (const CausalPair& p : pairs) {
    ordered_json j;
    j["cause"] = p.cause;
    j["effect"] = p.effect;
    j["pattern"] = p.pattern_id;
    j["direction"] = to_string(p.direction);
    j["sentence"] = p.source_sentence;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<CausalPair> pairs_from_jsonl_file(const std::string& path) {
  std::vector<CausalPair> out;
  LineReader reader(path);
  std::string line;
  std::size_t lineno = 0;
  while (reader.next(line)) {
    lineno++;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSONL record");
    CausalPair p;
    p.cause = j.value("cause", "");
    p.effect = j.value("effect", "");
    p.pattern_id = j.value("pattern", "");
    p.direction = category_from_string(j.value("direction", "EPC"));
    p.source_sentence = j.value("sentence", "");
    out.push_back(std::move(p));
  }
  return out;
}

std::string stats_to_json(const MiningStats& stats, bool with_timestamp) {
  ordered_json j;
  j["documents"] = stats.documents;
  j["malformed_documents"] = stats.malformed_documents;
  j["sentences"] = stats.sentences;
  j["accepted"] = stats.accepted;
  j["epc"] = stats.epc;
  j["cpe"] = stats.cpe;
  j["duplicates"] = stats.duplicates;
  ordered_json rejects;
  rejects["no_pattern"] = stats.no_pattern;
  rejects["ambiguous"] = stats.ambiguous;
  rejects["too_short"] = stats.rejected_too_short;
  rejects["negation"] = stats.rejected_negation;
  rejects["passive"] = stats.rejected_passive;
  j["rejected"] = rejects;
  ordered_json per_pattern = ordered_json::object();
  for (const auto& [id, n] : stats.per_pattern) per_pattern[id] = n;
  j["per_pattern"] = per_pattern;
  if (with_timestamp) j["timestamp"] = static_cast<std::int64_t>(::time(nullptr));
  return j.dump(2) + "\n";
}

}  // namespace causalgen
