#include "toolrft/policy/state.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "toolrft/error.hpp"
#include "toolrft/toolspace/call_syntax.hpp"

namespace toolrft {
namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words{"the", "a", "an", "for", "given", "with", "and",
                                           "of", "to", "in", "on", "it", "is", "who", "where"};
  return words;
}

bool is_numeral(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = s.front() == '-' ? 1 : 0;
  if (i == s.size()) return false;
  bool digit = false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digit = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit && s.back() != '.';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

double overlap_ratio(const std::vector<std::string>& tokens, const std::set<std::string>& against) {
  if (tokens.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& t : tokens) hit += against.count(t);
  return static_cast<double>(hit) / static_cast<double>(tokens.size());
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : word_tokens(text)) {
    if (!stopwords().count(t)) out.push_back(std::move(t));
  }
  return out;
}

/// Candidate values for one parameter drawn from the query and the schema.
std::vector<Value> value_pool(const ParamSpec& p, const QueryAnalysis& q) {
  std::vector<Value> pool;
  switch (p.type) {
    case ParamType::String:
      for (const auto& s : q.quoted) pool.emplace_back(s);
      break;
    case ParamType::Integer:
      for (const auto& n : q.numerals) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), v);
        if (ec == std::errc() && ptr == n.data() + n.size()) pool.emplace_back(v);
      }
      break;
    case ParamType::Number:
      for (const auto& n : q.numerals) {
        double v = 0;
        auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), v);
        if (ec == std::errc() && ptr == n.data() + n.size()) pool.emplace_back(v);
      }
      break;
    case ParamType::Boolean:
      pool.emplace_back(true);
      pool.emplace_back(false);
      break;
    case ParamType::Enum:
      for (const auto& e : p.enum_values) pool.emplace_back(e);
      break;
  }
  return pool;
}

StaticCallFeatures static_features(const ToolSpec& tool, const ToolCall& call,
                                   const QueryAnalysis& q) {
  StaticCallFeatures f;
  f.name_tokens = word_tokens(tool.name);
  f.name_overlap = overlap_ratio(f.name_tokens, q.tokens);
  f.description_overlap = overlap_ratio(content_tokens(tool.description), q.tokens);
  // The tool's own sentence: the valued sentence sharing the most words with
  // its name and description (parameter names excluded, they recur everywhere).
  std::set<std::string> vocab(f.name_tokens.begin(), f.name_tokens.end());
  for (const auto& t : content_tokens(tool.description)) vocab.insert(t);
  for (const auto& p : tool.parameters) {
    for (const auto& t : word_tokens(p.name)) vocab.erase(t);
  }
  const std::set<std::string>* own = nullptr;
  std::string_view own_text = q.lowered;
  std::size_t best = 0;
  for (std::size_t i = 0; i < q.valued_sentences.size(); ++i) {
    std::size_t hits = 0;
    for (const auto& t : vocab) hits += q.valued_sentences[i].count(t);
    if (hits > best) {
      best = hits;
      own = &q.valued_sentences[i];
      own_text = q.valued_sentence_text[i];
      f.own_sentence = i;
    }
  }
  std::size_t in_query = 0;
  std::size_t bound = 0;
  for (const auto& arg : call.arguments) {
    std::string surface = lower(value_surface(arg.value));
    std::string rendered = arg.value.index() == 3 && tool.find_param(arg.name) != nullptr &&
                                   tool.find_param(arg.name)->type == ParamType::String
                               ? lower(render_value(arg.value))
                               : surface;
    if (q.lowered.find(rendered) != std::string::npos) ++in_query;
    std::string words = arg.name;
    std::replace(words.begin(), words.end(), '_', ' ');
    if (own_text.find(lower(words) + " " + rendered) != std::string::npos) ++bound;
    f.surfaces.push_back(surface);
  }
  const double n_args = static_cast<double>(call.arguments.size());
  f.value_in_query = n_args == 0 ? 1.0 : static_cast<double>(in_query) / n_args;
  f.binding = n_args == 0 ? 1.0 : static_cast<double>(bound) / n_args;
  std::size_t mentioned = 0;
  std::size_t covered = 0;
  for (const auto& p : tool.parameters) {
    const std::vector<std::string> words = word_tokens(p.name);
    const bool named = own ? std::all_of(words.begin(), words.end(),
                                         [&](const std::string& w) { return own->count(w) > 0; })
                           : q.lowered.find(lower(p.name)) != std::string::npos;
    if (!named) continue;
    ++mentioned;
    if (call.find(p.name) != nullptr) ++covered;
  }
  f.param_coverage = mentioned == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(mentioned);
  return f;
}

void enumerate_tool_calls(const ToolSpec& tool, const QueryAnalysis& q, std::size_t cap,
                          std::vector<Step>& out) {
  std::vector<std::vector<std::optional<Value>>> pools;
  for (const auto& p : tool.parameters) {
    std::vector<std::optional<Value>> options;
    for (auto& v : value_pool(p, q)) options.emplace_back(std::move(v));
    if (!p.required) options.emplace_back(std::nullopt);
    if (options.empty()) return;  // a required parameter cannot be filled
    pools.push_back(std::move(options));
  }
  std::vector<std::size_t> odometer(pools.size(), 0);
  while (out.size() < cap) {
    ToolCall call;
    call.tool_name = tool.name;
    for (std::size_t i = 0; i < pools.size(); ++i) {
      const auto& choice = pools[i][odometer[i]];
      if (choice) call.arguments.push_back(Argument{tool.parameters[i].name, *choice});
    }
    out.push_back(Step::call(std::move(call)));
    std::size_t k = pools.size();
    while (k > 0) {
      --k;
      if (++odometer[k] < pools[k].size()) break;
      odometer[k] = 0;
      if (k == 0) return;
    }
    if (pools.empty()) return;
  }
}

const Step& refuse_step() {
  static const Step s = Step::refuse();
  return s;
}
const Step& terminal_step() {
  static const Step s = Step::terminal();
  return s;
}

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string value_surface(const Value& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return render_value(value);
}

QueryAnalysis analyze_query(const Example& example) {
  QueryAnalysis q;
  const std::string& text = example.query;
  q.lowered = lower(text);
  for (auto& t : word_tokens(text)) q.tokens.insert(std::move(t));

  // Quoted literals first, then bare numerals in the remaining text.
  std::string unquoted;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '"') {
      std::size_t close = text.find('"', i + 1);
      if (close == std::string::npos) {
        unquoted.append(text, i, std::string::npos);
        break;
      }
      std::string lit = text.substr(i + 1, close - i - 1);
      if (std::find(q.quoted.begin(), q.quoted.end(), lit) == q.quoted.end()) q.quoted.push_back(lit);
      unquoted.push_back(' ');
      i = close + 1;
      continue;
    }
    unquoted.push_back(text[i]);
    ++i;
  }
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && (cur.back() == '.' || cur.back() == ',')) cur.pop_back();
    if (is_numeral(cur) && std::find(q.numerals.begin(), q.numerals.end(), cur) == q.numerals.end()) {
      q.numerals.push_back(cur);
    }
    cur.clear();
  };
  for (char ch : unquoted) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',' || ch == '?' || ch == '!') {
      flush();
    } else {
      cur.push_back(ch);
    }
  }
  flush();

  for (const auto& s : q.quoted) q.value_surfaces.push_back(lower(s));
  for (const auto& n : q.numerals) q.value_surfaces.push_back(n);
  std::set<std::string> enum_words;
  for (const auto& tool : example.tools) {
    for (const auto& p : tool.parameters) {
      for (const auto& e : p.enum_values) enum_words.insert(lower(e));
      if (p.type == ParamType::Boolean) {
        enum_words.insert("true");
        enum_words.insert("false");
      }
    }
  }
  for (const auto& w : enum_words) {
    if (q.tokens.count(w)) q.value_surfaces.push_back(w);
  }

  // Sentences (split on . ! ? outside quotes) that carry at least one literal.
  std::string sentence;
  bool in_quote = false;
  bool has_value = false;
  auto close_sentence = [&] {
    std::set<std::string> toks;
    for (auto& t : word_tokens(sentence)) toks.insert(std::move(t));
    has_value = has_value || std::any_of(toks.begin(), toks.end(),
                                         [&](const std::string& t) { return enum_words.count(t) > 0; });
    if (has_value) {
      q.valued_sentences.push_back(std::move(toks));
      q.valued_sentence_text.push_back(lower(sentence));
    }
    sentence.clear();
    has_value = false;
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    char ch = text[k];
    sentence.push_back(ch);
    if (ch == '"') {
      in_quote = !in_quote;
      has_value = true;
      continue;
    }
    if (in_quote) continue;
    if (std::isdigit(static_cast<unsigned char>(ch))) has_value = true;
    bool decimal_point = ch == '.' && k > 0 && k + 1 < text.size() &&
                         std::isdigit(static_cast<unsigned char>(text[k - 1])) &&
                         std::isdigit(static_cast<unsigned char>(text[k + 1]));
    if ((ch == '.' || ch == '!' || ch == '?') && !decimal_point) close_sentence();
  }
  if (!sentence.empty()) close_sentence();
  if (q.valued_sentences.empty() && !q.value_surfaces.empty()) {
    std::set<std::string> toks(q.tokens.begin(), q.tokens.end());
    q.valued_sentences.push_back(std::move(toks));
    q.valued_sentence_text.push_back(q.lowered);
  }
  return q;
}

std::shared_ptr<const TaskContext> make_task_context(const Example& example,
                                                    const PolicyConfig& config) {
  auto ctx = std::make_shared<TaskContext>();
  ctx->example = example;
  ctx->config = config;
  ctx->query = analyze_query(example);
  for (const auto& tool : example.tools) {
    std::size_t before = ctx->calls.size();
    enumerate_tool_calls(tool, ctx->query, config.candidate_cap, ctx->calls);
    for (std::size_t i = before; i < ctx->calls.size(); ++i) {
      ctx->call_features.push_back(static_features(tool, ctx->calls[i].as_call(), ctx->query));
    }
  }
  for (const auto& tool : example.tools) {
    ctx->max_tool_overlap =
        std::max(ctx->max_tool_overlap, overlap_ratio(word_tokens(tool.name), ctx->query.tokens));
  }
  return ctx;
}

SearchState SearchState::root(const Example& example, const PolicyConfig& config) {
  return SearchState(make_task_context(example, config), {});
}

SearchState SearchState::root(std::shared_ptr<const TaskContext> context) {
  return SearchState(std::move(context), {});
}

bool SearchState::is_terminal() const {
  return (!steps_.empty() && steps_.back().is_terminal()) || steps_.size() >= max_depth();
}

bool SearchState::has_refused() const {
  return std::any_of(steps_.begin(), steps_.end(), [](const Step& s) { return s.is_refuse(); });
}

SearchState SearchState::extend(Step step) const {
  std::vector<Step> next = steps_;
  next.push_back(std::move(step));
  return SearchState(ctx_, std::move(next));
}

bool SearchState::operator==(const SearchState& other) const {
  return (ctx_ == other.ctx_ || ctx_->example == other.ctx_->example) && steps_ == other.steps_;
}

std::vector<const Step*> candidate_refs(const SearchState& state) {
  if (state.is_terminal()) throw PreconditionError("no candidates: state is terminal");
  std::vector<const Step*> out;
  if (state.has_refused()) {
    out.push_back(&terminal_step());
    return out;
  }
  const auto& calls = state.context().calls;
  out.reserve(calls.size() + 2);
  for (const auto& c : calls) out.push_back(&c);
  if (state.depth() == 0) out.push_back(&refuse_step());
  if (state.depth() >= 1) out.push_back(&terminal_step());
  return out;
}

std::vector<Step> enumerate_candidates(const SearchState& state) {
  std::vector<Step> out;
  for (const Step* s : candidate_refs(state)) out.push_back(*s);
  return out;
}

}  // namespace toolrft
