// Sentence splitting and tokenization shared by the miner, graph and pipeline.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace causalgen {

// A single token with byte offsets into the string it was cut from.
// `text` preserves the source casing, `lower` is the ASCII-lowercased copy
// used for matching.
struct Token {
  std::string text;
  std::string lower;
  std::size_t begin = 0;  // byte offset of first byte
  std::size_t end = 0;    // one past last byte
  bool is_punct = false;  // token consists of punctuation only
};

// A sentence with its byte offset in the source document.
struct Sentence {
  std::string text;
  std::size_t offset = 0;
};

bool utf8_valid(std::string_view s);

std::string ascii_lower(std::string_view s);

// Whitespace split with leading/trailing ASCII punctuation detached as
// separate tokens. Contractions on "n't" are split PTB-style
// ("didn't" -> "did", "n't"); internal hyphens and apostrophes stay.
std::vector<Token> tokenize(std::string_view text);

// Default abbreviation list used by split_sentences ("dr.", "e.g.", ...).
// Entries are lowercase and include the trailing period.
const std::unordered_set<std::string>& default_abbreviations();

std::unordered_set<std::string> load_abbreviations(const std::string& path);

// Splits on {. ! ?} followed by whitespace and an uppercase letter or
// opening quote. A period is not a boundary after a known abbreviation or
// a single-letter initial. Sentences are trimmed; concatenating them covers
// all non-whitespace text of the input.
std::vector<Sentence> split_sentences(std::string_view text,
                                      const std::unordered_set<std::string>& abbreviations);

inline std::vector<Sentence> split_sentences(std::string_view text) {
  return split_sentences(text, default_abbreviations());
}

}  // namespace causalgen
