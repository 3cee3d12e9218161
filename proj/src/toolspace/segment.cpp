#include "toolrft/toolspace/segment.hpp"

#include <cctype>
#include <string>

#include "toolrft/toolspace/call_syntax.hpp"

namespace toolrft {
namespace {

bool ident_start(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalpha(c) || c == '_';
}
bool ident_char(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalnum(c) || c == '_';
}
bool is_terminator(char ch) { return ch == '.' || ch == '!' || ch == '?'; }

bool has_word(std::string_view s) {
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) return true;
  }
  return false;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void flush_sentences(std::string_view text, std::vector<Step>& out) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_terminator(text[i])) {
      while (i < text.size() && is_terminator(text[i])) ++i;
      std::string sentence = trim(text.substr(start, i - start));
      if (has_word(sentence)) out.push_back(Step::text(std::move(sentence)));
      start = i;
    } else {
      ++i;
    }
  }
  std::string rest = trim(text.substr(start));
  if (has_word(rest)) out.push_back(Step::text(std::move(rest)));
}

}  // namespace

std::vector<Step> segment_steps(std::string_view response_text) {
  std::vector<Step> steps;
  std::size_t text_start = 0;
  std::size_t i = 0;
  const std::size_t n = response_text.size();
  while (i < n) {
    bool word_boundary = i == 0 || !ident_char(response_text[i - 1]);
    if (word_boundary && ident_start(response_text[i])) {
      std::size_t j = i;
      while (j < n && ident_char(response_text[j])) ++j;
      if (j < n && response_text[j] == '(') {
        std::size_t len = scan_call_expression(response_text, i);
        flush_sentences(response_text.substr(text_start, i - text_start), steps);
        steps.push_back(Step::call(parse_tool_call(response_text.substr(i, len))));
        i += len;
        text_start = i;
        continue;
      }
      i = j;
      continue;
    }
    ++i;
  }
  flush_sentences(response_text.substr(text_start), steps);
  steps.push_back(Step::terminal());
  return steps;
}

}  // namespace toolrft
