#include "causalgen/text.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "causalgen/data_tables.hpp"

namespace causalgen {

namespace {

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return std::ispunct(c) != 0;
}

bool all_punct(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!is_ascii_punct(c)) return false;
  return true;
}

bool is_upper_ascii(unsigned char c) { return c >= 'A' && c <= 'Z'; }

// Opening quotes that may begin the next sentence. Checks both ASCII quotes
// and the UTF-8 curly forms.
bool starts_with_open_quote(std::string_view s) {
  if (s.empty()) return false;
  if (s[0] == '"' || s[0] == '\'') return true;
  // U+201C left double quote (e2 80 9c), U+2018 left single quote (e2 80 98)
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xe2 &&
      static_cast<unsigned char>(s[1]) == 0x80) {
    unsigned char b = static_cast<unsigned char>(s[2]);
    return b == 0x9c || b == 0x98;
  }
  return false;
}

bool is_closing_trailer(unsigned char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

}  // namespace

bool utf8_valid(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    unsigned char c = s[i];
    std::size_t len;
    unsigned cp_min;
    if (c < 0x80) {
      i++;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp_min = 0x80;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp_min = 0x800;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp_min = 0x10000;
    } else {
      return false;
    }
    if (i + len > n) return false;
    unsigned cp = c & (0xff >> (len + 1));
    for (std::size_t k = 1; k < len; k++) {
      unsigned char cc = s[i + k];
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (cp < cp_min) return false;                  // overlong
    if (cp > 0x10ffff) return false;                // out of range
    if (cp >= 0xd800 && cp <= 0xdfff) return false; // surrogate
    i += len;
  }
  return true;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

void emit_token(std::vector<Token>& out, std::string_view src, std::size_t begin,
                std::size_t end) {
  if (begin >= end) return;
  Token t;
  t.text = std::string(src.substr(begin, end - begin));
  t.lower = ascii_lower(t.text);
  t.begin = begin;
  t.end = end;
  t.is_punct = all_punct(t.text);
  out.push_back(std::move(t));
}

// Splits one whitespace-delimited chunk into tokens: leading punctuation,
// the core (with "n't" detached), trailing punctuation.
void split_chunk(std::vector<Token>& out, std::string_view src, std::size_t begin,
                 std::size_t end) {
  // leading punctuation, one token per char
  while (begin < end && is_ascii_punct(src[begin])) {
    emit_token(out, src, begin, begin + 1);
    begin++;
  }
  // trailing punctuation: find extent, emit after the core
  std::size_t trail = end;
  while (trail > begin && is_ascii_punct(src[trail - 1])) trail--;
  if (trail == begin) {
    // chunk was all punctuation and has been fully emitted as lead chars
    for (std::size_t i = begin; i < end; i++) emit_token(out, src, i, i + 1);
    return;
  }
  // core [begin, trail); detach a final "n't"
  std::size_t core_end = trail;
  if (core_end - begin > 3) {
    std::string_view tail = src.substr(core_end - 3, 3);
    if ((tail[0] == 'n' || tail[0] == 'N') && tail[1] == '\'' &&
        (tail[2] == 't' || tail[2] == 'T')) {
      emit_token(out, src, begin, core_end - 3);
      emit_token(out, src, core_end - 3, core_end);
    } else {
      emit_token(out, src, begin, core_end);
    }
  } else {
    emit_token(out, src, begin, core_end);
  }
  for (std::size_t i = trail; i < end; i++) emit_token(out, src, i, i + 1);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space_byte(text[i])) i++;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !is_space_byte(text[j])) j++;
    split_chunk(out, text, i, j);
    i = j;
  }
  return out;
}

namespace {

std::unordered_set<std::string> parse_abbreviations(std::string_view text) {
  std::unordered_set<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    std::string low = ascii_lower(line);
    if (low.back() != '.') low += '.';
    out.insert(std::move(low));
  }
  return out;
}

}  // namespace

const std::unordered_set<std::string>& default_abbreviations() {
  static const std::unordered_set<std::string> abbrevs =
      parse_abbreviations(builtin_abbreviations_txt());
  return abbrevs;
}

std::unordered_set<std::string> load_abbreviations(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open abbreviation file: " + path);
  std::string content;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) content.append(buf, n);
  std::fclose(f);
  return parse_abbreviations(content);
}

namespace {

// The lowercased word (letters and internal periods) ending at `pos`
// inclusive of the terminal period at `pos`.
std::string word_before_period(std::string_view text, std::size_t pos) {
  std::size_t start = pos;
  while (start > 0) {
    unsigned char c = text[start - 1];
    if (std::isalpha(c) || c == '.') {
      start--;
    } else {
      break;
    }
  }
  return ascii_lower(text.substr(start, pos - start + 1));
}

}  // namespace

std::vector<Sentence> split_sentences(std::string_view text,
                                      const std::unordered_set<std::string>& abbreviations) {
  std::vector<Sentence> out;
  const std::size_t n = text.size();
  std::size_t sent_begin = 0;

  auto flush = [&](std::size_t end) {
    std::size_t b = sent_begin;
    while (b < end && is_space_byte(text[b])) b++;
    std::size_t e = end;
    while (e > b && is_space_byte(text[e - 1])) e--;
    if (b < e) out.push_back(Sentence{std::string(text.substr(b, e - b)), b});
    sent_begin = end;
  };

  for (std::size_t i = 0; i < n; i++) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;

    if (c == '.') {
      std::string word = word_before_period(text, i);
      if (abbreviations.count(word)) continue;
      // single-letter initial, e.g. "J. Smith"
      if (word.size() == 2 && is_upper_ascii(text[i - 1])) continue;
    }

    std::size_t j = i + 1;
    while (j < n && is_closing_trailer(text[j])) j++;
    if (j >= n) {
      flush(j);
      i = j - 1;
      continue;
    }
    if (!is_space_byte(text[j])) continue;
    std::size_t k = j;
    while (k < n && is_space_byte(text[k])) k++;
    if (k < n && (is_upper_ascii(text[k]) || starts_with_open_quote(text.substr(k)))) {
      flush(j);
      i = j - 1;
    }
  }
  flush(n);
  return out;
}

}  // namespace causalgen
