#include "causalgen/morphology.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "causalgen/data_tables.hpp"
#include "causalgen/text.hpp"

namespace causalgen {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool is_vowel_y(char c) { return is_vowel(c) || c == 'y'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel_y);
}

int vowel_group_count(std::string_view s) {
  int groups = 0;
  bool in_group = false;
  for (char c : s) {
    if (is_vowel(c)) {
      if (!in_group) groups++;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  return groups;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Final-consonant doubling: monosyllabic stem ending consonant-vowel-consonant
// with the final consonant not in {w, x, y} (run -> running, stop -> stopped).
bool doubles_final_consonant(std::string_view s) {
  if (s.size() < 3) return false;
  char last = s[s.size() - 1];
  if (is_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
  if (!is_vowel(s[s.size() - 2])) return false;
  if (is_vowel(s[s.size() - 3])) return false;
  return vowel_group_count(s) == 1;
}

VariantClass parse_class(std::string_view s) {
  if (s == "lemma") return VariantClass::Lemma;
  if (s == "plural") return VariantClass::Plural;
  if (s == "third") return VariantClass::Third;
  if (s == "present") return VariantClass::Present;
  if (s == "past") return VariantClass::Past;
  if (s == "participle") return VariantClass::Participle;
  if (s == "gerund") return VariantClass::Gerund;
  if (s == "comparative") return VariantClass::Comparative;
  if (s == "superlative") return VariantClass::Superlative;
  if (s == "derived") return VariantClass::Derived;
  throw std::runtime_error("unknown variant class: " + std::string(s));
}

}  // namespace

std::string inflect_s_form(std::string_view lemma) {
  std::string l(lemma);
  if (l.empty()) return l;
  if (ends_with(l, "s") || ends_with(l, "x") || ends_with(l, "z") || ends_with(l, "ch") ||
      ends_with(l, "sh"))
    return l + "es";
  if (l.size() >= 2 && l.back() == 'y' && !is_vowel(l[l.size() - 2]))
    return l.substr(0, l.size() - 1) + "ies";
  return l + "s";
}

std::string inflect_past(std::string_view lemma) {
  std::string l(lemma);
  if (l.empty()) return l;
  if (l.back() == 'e') return l + "d";
  if (l.size() >= 2 && l.back() == 'y' && !is_vowel(l[l.size() - 2]))
    return l.substr(0, l.size() - 1) + "ied";
  if (doubles_final_consonant(l)) return l + l.back() + "ed";
  return l + "ed";
}

std::string inflect_gerund(std::string_view lemma) {
  std::string l(lemma);
  if (l.empty()) return l;
  if (ends_with(l, "ie")) return l.substr(0, l.size() - 2) + "ying";
  if (l.back() == 'e' && !ends_with(l, "ee") && l.size() >= 2)
    return l.substr(0, l.size() - 1) + "ing";
  if (doubles_final_consonant(l)) return l + l.back() + "ing";
  return l + "ing";
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex =
      Lexicon::from_strings(builtin_lexicon_tsv(), builtin_stopwords_txt());
  return lex;
}

Lexicon Lexicon::from_strings(std::string_view lexicon_tsv, std::string_view stopwords_txt) {
  Lexicon lex;
  std::istringstream in{std::string(lexicon_tsv)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error("malformed lexicon line: " + line);
    std::string form = ascii_lower(line.substr(0, t1));
    std::string lemma = ascii_lower(line.substr(t1 + 1, t2 - t1 - 1));
    VariantClass cls = parse_class(line.substr(t2 + 1));
    if (form.empty() || lemma.empty())
      throw std::runtime_error("malformed lexicon line: " + line);

    lex.lemma_map_.emplace(form, lemma);  // first entry wins
    auto& vars = lex.variant_map_[lemma];
    if (std::none_of(vars.begin(), vars.end(),
                     [&](const VariantEntry& v) { return v.form == form; }))
      vars.push_back(VariantEntry{form, cls});
    lex.known_lemmas_.insert(lemma);
    lex.entries_++;
  }
  // closure: every lemma is one of its own variants
  for (auto& [lemma, vars] : lex.variant_map_) {
    if (std::none_of(vars.begin(), vars.end(),
                     [&](const VariantEntry& v) { return v.form == lemma; }))
      vars.push_back(VariantEntry{lemma, VariantClass::Lemma});
    lex.lemma_map_.emplace(lemma, lemma);
  }

  std::istringstream sw{std::string(stopwords_txt)};
  while (std::getline(sw, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lex.function_words_.insert(ascii_lower(line));
  }
  return lex;
}

Lexicon Lexicon::from_files(const std::string& lexicon_path, const std::string& stopwords_path) {
  auto slurp = [](const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open lexicon file: " + path);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
    return out;
  };
  return from_strings(slurp(lexicon_path), slurp(stopwords_path));
}

namespace {

struct StemCandidate {
  std::string stem;
  std::string (*regen)(std::string_view);
};

// Candidate stems in priority order: longest suffix first; within one
// suffix un-doubled before bare before e-restored.
std::vector<StemCandidate> stem_candidates(const std::string& w) {
  std::vector<StemCandidate> out;
  auto add = [&](std::string stem, std::string (*regen)(std::string_view)) {
    out.push_back(StemCandidate{std::move(stem), regen});
  };
  const std::size_t n = w.size();
  if (n >= 6 && ends_with(w, "ying")) add(w.substr(0, n - 4) + "ie", inflect_gerund);
  if (n >= 5 && ends_with(w, "ies")) add(w.substr(0, n - 3) + "y", inflect_s_form);
  if (n >= 5 && ends_with(w, "ied")) add(w.substr(0, n - 3) + "y", inflect_past);
  if (n >= 5 && ends_with(w, "ing")) {
    std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) {
      if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2])
        add(stem.substr(0, stem.size() - 1), inflect_gerund);
      add(stem, inflect_gerund);
      add(stem + "e", inflect_gerund);
    }
  }
  if (n >= 4 && ends_with(w, "es")) add(w.substr(0, n - 2), inflect_s_form);
  if (n >= 4 && ends_with(w, "ed")) {
    std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) {
      if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2])
        add(stem.substr(0, stem.size() - 1), inflect_past);
      add(stem, inflect_past);
    }
  }
  if (n >= 3 && w.back() == 's' && !ends_with(w, "ss")) add(w.substr(0, n - 1), inflect_s_form);
  if (n >= 3 && w.back() == 'd' && w[n - 2] == 'e') add(w.substr(0, n - 1), inflect_past);
  return out;
}

}  // namespace

std::string Lexicon::lemmatize(std::string_view word) const {
  std::string w = ascii_lower(word);
  if (w.empty()) return w;
  for (int iter = 0; iter < 8; iter++) {
    auto it = lemma_map_.find(w);
    if (it != lemma_map_.end()) {
      if (it->second == w) return w;
      w = it->second;
      continue;
    }
    std::string best;
    bool best_known = false;
    for (const StemCandidate& c : stem_candidates(w)) {
      if (c.stem.size() < 2 || !has_vowel(c.stem)) continue;
      if (c.regen(c.stem) != w) continue;
      bool known = known_lemmas_.count(c.stem) > 0;
      if (best.empty() || (known && !best_known)) {
        best = c.stem;
        best_known = known;
      }
      if (best_known) break;
    }
    if (best.empty()) return w;
    w = best;
  }
  return w;
}

std::set<std::string> Lexicon::variants(std::string_view lemma) const {
  std::string l = ascii_lower(lemma);
  std::set<std::string> out;
  if (l.empty()) return out;
  out.insert(l);

  bool has_irregular_s = false, has_irregular_past = false, has_irregular_gerund = false;
  auto it = variant_map_.find(l);
  if (it != variant_map_.end()) {
    for (const VariantEntry& v : it->second) {
      out.insert(v.form);
      switch (v.cls) {
        case VariantClass::Plural:
        case VariantClass::Third:
        case VariantClass::Present:
          has_irregular_s = true;
          break;
        case VariantClass::Past:
          has_irregular_past = true;
          break;
        case VariantClass::Gerund:
          has_irregular_gerund = true;
          break;
        default:
          break;
      }
    }
  }
  if (l.size() >= 2 && has_vowel(l)) {
    if (!has_irregular_s) out.insert(inflect_s_form(l));
    if (!has_irregular_past) out.insert(inflect_past(l));
    if (!has_irregular_gerund) out.insert(inflect_gerund(l));
  }
  return out;
}

bool Lexicon::is_open_class(std::string_view word) const {
  return function_words_.count(ascii_lower(word)) == 0;
}

bool Lexicon::is_known_lemma(std::string_view word) const {
  return known_lemmas_.count(ascii_lower(word)) > 0;
}

}  // namespace causalgen
