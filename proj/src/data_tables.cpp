#include "causalgen/data_tables.hpp"

#include "data_tables_generated.hpp"

namespace causalgen {

std::string_view builtin_patterns_tsv() { return embedded::kPatternsTsv; }
std::string_view builtin_lexicon_tsv() { return embedded::kLexiconTsv; }
std::string_view builtin_stopwords_txt() { return embedded::kStopwordsTxt; }
std::string_view builtin_abbreviations_txt() { return embedded::kAbbreviationsTxt; }

}  // namespace causalgen
