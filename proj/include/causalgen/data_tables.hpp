// Built-in copies of the shipped data inventories (data/*.tsv). The files
// under data/ are the source of truth; they are embedded at configure time
// so the library works without any runtime data path.
#pragma once

#include <string_view>

namespace causalgen {

std::string_view builtin_patterns_tsv();
std::string_view builtin_lexicon_tsv();
std::string_view builtin_stopwords_txt();
std::string_view builtin_abbreviations_txt();

}  // namespace causalgen
