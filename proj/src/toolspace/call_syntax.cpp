#include "toolrft/toolspace/call_syntax.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "toolrft/error.hpp"

namespace toolrft {
namespace {

constexpr std::string_view kOpenCurly = "\xE2\x80\x9C";   // left double quotation mark
constexpr std::string_view kCloseCurly = "\xE2\x80\x9D";  // right double quotation mark

bool is_ident_start(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalpha(c) || c == '_';
}

bool is_ident_char(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalnum(c) || c == '_';
}

class CallParser {
 public:
  CallParser(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  ToolCall parse_call() {
    skip_ws();
    ToolCall call;
    call.tool_name = identifier("tool name");
    expect('(');
    skip_ws();
    std::set<std::string> seen;
    if (!consume(')')) {
      while (true) {
        skip_ws();
        std::size_t name_pos = pos_;
        Argument arg;
        arg.name = identifier("argument name");
        skip_ws();
        expect('=');
        skip_ws();
        arg.value = literal();
        if (!seen.insert(arg.name).second) {
          throw ParseError("duplicate argument name '" + arg.name + "'", name_pos);
        }
        call.arguments.push_back(std::move(arg));
        skip_ws();
        if (consume(')')) break;
        expect(',');
        skip_ws();
        if (consume(')')) break;  // trailing comma
      }
    }
    return call;
  }

  std::size_t pos() const { return pos_; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

 private:
  bool consume(char ch) {
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char ch) {
    if (!consume(ch)) {
      if (at_end()) {
        throw ParseError(std::string("expected '") + ch + "' but input ended", pos_);
      }
      throw ParseError(std::string("expected '") + ch + "' but found '" + text_[pos_] + "'", pos_);
    }
  }

  std::string identifier(const char* what) {
    if (at_end() || !is_ident_start(text_[pos_])) {
      throw ParseError(std::string("expected ") + what, pos_);
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Value literal() {
    if (at_end()) throw ParseError("expected a literal but input ended", pos_);
    char ch = text_[pos_];
    if (ch == '"' || ch == '\'') return Value(quoted(std::string_view(&text_[pos_], 1),
                                                     std::string_view(&text_[pos_], 1)));
    if (text_.substr(pos_, kOpenCurly.size()) == kOpenCurly) return Value(quoted(kOpenCurly, kCloseCurly));
    if (ch == '-' || ch == '+' || std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      return number();
    }
    if (is_ident_start(ch)) {
      std::size_t start = pos_;
      std::string word = identifier("literal");
      if (word == "true") return Value(true);
      if (word == "false") return Value(false);
      throw ParseError("unquoted literal '" + word + "'", start);
    }
    throw ParseError(std::string("unexpected character '") + ch + "'", pos_);
  }

  std::string quoted(std::string_view open, std::string_view close) {
    std::size_t start = pos_;
    pos_ += open.size();
    std::string out;
    while (true) {
      if (at_end()) throw ParseError("unterminated string literal", start);
      if (text_.substr(pos_, close.size()) == close) {
        pos_ += close.size();
        return out;
      }
      char ch = text_[pos_];
      if (ch == '\\') {
        if (pos_ + 1 >= text_.size()) throw ParseError("dangling escape", pos_);
        char esc = text_[pos_ + 1];
        switch (esc) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '\\': case '"': case '\'': case '/': out.push_back(esc); break;
          default: throw ParseError(std::string("unknown escape '\\") + esc + "'", pos_);
        }
        pos_ += 2;
        continue;
      }
      out.push_back(ch);
      ++pos_;
    }
  }

  Value number() {
    std::size_t start = pos_;
    if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
    bool is_real = false;
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else if (ch == '.' || ch == 'e' || ch == 'E') {
        is_real = true;
        ++pos_;
        if ((ch == 'e' || ch == 'E') && pos_ < text_.size() &&
            (text_[pos_] == '+' || text_[pos_] == '-')) {
          ++pos_;
        }
      } else {
        break;
      }
    }
    std::string_view token = text_.substr(start, pos_ - start);
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') ++first;
    if (!is_real) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return Value(v);
      if (ec != std::errc::result_out_of_range) {
        throw ParseError("malformed integer '" + std::string(token) + "'", start);
      }
    }
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, d);
    if (ec != std::errc() || ptr != last || !std::isfinite(d)) {
      throw ParseError("malformed number '" + std::string(token) + "'", start);
    }
    return Value(d);
  }

  std::string_view text_;
  std::size_t pos_;
};

void append_escaped(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(ch);
    }
  }
  out.push_back('"');
}

}  // namespace

ToolCall parse_tool_call(std::string_view text) {
  CallParser parser(text, 0);
  ToolCall call = parser.parse_call();
  parser.skip_ws();
  if (!parser.at_end()) throw ParseError("trailing characters after call", parser.pos());
  return call;
}

std::size_t scan_call_expression(std::string_view text, std::size_t pos) {
  CallParser parser(text, pos);
  parser.parse_call();
  return parser.pos() - pos;
}

std::string render_value(const Value& value) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double d) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
      std::string s(buf, ptr);
      // Keep reals distinguishable from integers on re-parse.
      if (std::isfinite(d) && s.find_first_of(".eE") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(const std::string& s) const {
      std::string out;
      append_escaped(out, s);
      return out;
    }
  };
  return std::visit(Visitor{}, value);
}

std::string render_tool_call(const ToolCall& call) {
  std::string out = call.tool_name;
  out.push_back('(');
  for (std::size_t i = 0; i < call.arguments.size(); ++i) {
    if (i > 0) out += ", ";
    out += call.arguments[i].name;
    out.push_back('=');
    out += render_value(call.arguments[i].value);
  }
  out.push_back(')');
  return out;
}

}  // namespace toolrft
