// English lemmatization and inflection-variant generation.
//
// A small rule engine plus a shipped exception TSV. Lemmatization is
// generate-and-test: a candidate stem survives only if the inflection rules
// regenerate the observed surface form, so rule round-trips are exact.
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace causalgen {

enum class VariantClass {
  Lemma,
  Plural,
  Third,
  Present,
  Past,
  Participle,
  Gerund,
  Comparative,
  Superlative,
  Derived,
};

class Lexicon {
 public:
  // Exception table and function-word list embedded from data/.
  static const Lexicon& builtin();
  static Lexicon from_strings(std::string_view lexicon_tsv, std::string_view stopwords_txt);
  static Lexicon from_files(const std::string& lexicon_path, const std::string& stopwords_path);

  // Exception lookup first, then suffix rules with regeneration check and
  // known-lemma preference; unknown forms come back unchanged. Idempotent.
  std::string lemmatize(std::string_view word) const;

  // All inflected forms of a lemma: the lemma itself, rule-generated
  // s-form/past/gerund (suppressed where the exception table supplies an
  // irregular of the same class), and every exception-table form.
  std::set<std::string> variants(std::string_view lemma) const;

  bool is_open_class(std::string_view word) const;
  bool is_known_lemma(std::string_view word) const;

  std::size_t entry_count() const { return entries_; }

 private:
  struct VariantEntry {
    std::string form;
    VariantClass cls;
  };

  std::unordered_map<std::string, std::string> lemma_map_;
  std::unordered_map<std::string, std::vector<VariantEntry>> variant_map_;
  std::unordered_set<std::string> known_lemmas_;
  std::unordered_set<std::string> function_words_;
  std::size_t entries_ = 0;
};

// Regular spelling rules, exposed for tests.
std::string inflect_s_form(std::string_view lemma);
std::string inflect_past(std::string_view lemma);
std::string inflect_gerund(std::string_view lemma);

}  // namespace causalgen
