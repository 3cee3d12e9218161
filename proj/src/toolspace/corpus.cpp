#include "toolrft/toolspace/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "toolrft/error.hpp"
#include "toolrft/rng.hpp"
#include "toolrft/toolspace/call_syntax.hpp"

namespace toolrft {
namespace {

struct Verb {
  const char* word;
  const char* third_person;
  std::array<const char*, 2> synonyms;
};

constexpr std::array<Verb, 16> kVerbs{{
    {"get", "Gets", {"fetch", "retrieve"}},
    {"find", "Finds", {"locate", "discover"}},
    {"book", "Books", {"reserve", "secure"}},
    {"convert", "Converts", {"transform", "exchange"}},
    {"search", "Searches", {"browse", "scan"}},
    {"send", "Sends", {"deliver", "dispatch"}},
    {"create", "Creates", {"make", "add"}},
    {"update", "Updates", {"modify", "change"}},
    {"cancel", "Cancels", {"abort", "drop"}},
    {"check", "Checks", {"verify", "inspect"}},
    {"list", "Lists", {"show", "enumerate"}},
    {"schedule", "Schedules", {"plan", "arrange"}},
    {"track", "Tracks", {"follow", "monitor"}},
    {"calculate", "Calculates", {"compute", "estimate"}},
    {"translate", "Translates", {"interpret", "render"}},
    {"delete", "Deletes", {"remove", "erase"}},
}};

struct Noun {
  const char* word;
  const char* synonym;
};

constexpr std::array<Noun, 20> kNouns{{
    {"weather", "forecast"}, {"flight", "airfare"},   {"hotel", "lodging"},
    {"currency", "money"},   {"email", "message"},    {"event", "occasion"},
    {"stock", "shares"},     {"order", "purchase"},   {"recipe", "dish"},
    {"movie", "film"},       {"route", "itinerary"},  {"reminder", "alert"},
    {"invoice", "bill"},     {"song", "track"},       {"news", "headlines"},
    {"ticket", "pass"},      {"package", "parcel"},   {"meeting", "appointment"},
    {"restaurant", "diner"}, {"account", "profile"},
}};

enum class ValueKind { City, Date, Person, Word, Symbol, Count, Amount, Flag, Choice };

struct ParamTemplate {
  const char* name;
  ParamType type;
  ValueKind kind;
  const char* description;
  std::array<const char*, 4> choices;  // enum domains
};

constexpr std::array<ParamTemplate, 18> kParams{{
    {"location", ParamType::String, ValueKind::City, "The city of interest", {}},
    {"date", ParamType::String, ValueKind::Date, "The date in yyyy-mm-dd format", {}},
    {"destination", ParamType::String, ValueKind::City, "Where the trip ends", {}},
    {"origin", ParamType::String, ValueKind::City, "Where the trip starts", {}},
    {"recipient", ParamType::String, ValueKind::Person, "Who receives it", {}},
    {"owner", ParamType::String, ValueKind::Person, "The responsible person", {}},
    {"title", ParamType::String, ValueKind::Word, "A short title", {}},
    {"keyword", ParamType::String, ValueKind::Word, "A search keyword", {}},
    {"symbol", ParamType::String, ValueKind::Symbol, "A ticker or code", {}},
    {"count", ParamType::Integer, ValueKind::Count, "How many items", {}},
    {"guests", ParamType::Integer, ValueKind::Count, "Number of people", {}},
    {"amount", ParamType::Number, ValueKind::Amount, "A monetary amount", {}},
    {"budget", ParamType::Number, ValueKind::Amount, "The maximum spend", {}},
    {"urgent", ParamType::Boolean, ValueKind::Flag, "Whether it is urgent", {}},
    {"language", ParamType::Enum, ValueKind::Choice, "Output language",
     {"english", "french", "german", "spanish"}},
    {"unit", ParamType::Enum, ValueKind::Choice, "Measurement unit",
     {"metric", "imperial", "kelvin", "nautical"}},
    {"priority", ParamType::Enum, ValueKind::Choice, "Priority level",
     {"low", "normal", "high", "critical"}},
    {"format", ParamType::Enum, ValueKind::Choice, "Output format",
     {"brief", "detailed", "tabular", "summary"}},
}};

constexpr std::array<const char*, 14> kCities{
    "San Francisco", "Paris",  "Tokyo",  "Berlin", "Lima", "Oslo",  "Cairo",
    "Toronto",       "Madrid", "Nairobi", "Dublin", "Seoul", "Quito", "Perth"};
constexpr std::array<const char*, 12> kPeople{
    "Alice", "Bob", "Carmen", "Dmitri", "Emeka", "Farah",
    "Goran", "Hana", "Ivan", "Jun", "Kofi", "Lena"};
constexpr std::array<const char*, 12> kWords{
    "budget review", "kickoff", "birthday", "jazz", "quarterly report", "launch",
    "pasta", "hiking", "sprint demo", "yoga", "thriller", "roadmap"};
constexpr std::array<const char*, 10> kSymbols{
    "AAPL", "MSFT", "EUR", "USD", "JPY", "GBP", "TSLA", "NVDA", "CHF", "AMZN"};

constexpr std::array<const char*, 4> kFirstLeads{"Please", "Can you", "I need you to", "Kindly"};
constexpr std::array<const char*, 4> kNextLeads{"Then", "After that", "Also", "Next"};
constexpr std::array<const char*, 4> kChitChat{
    "Hi there.", "I have a request.", "Hello, I am planning my week.", "Good morning."};

std::string param_words(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

class Generator {
 public:
  explicit Generator(const CorpusConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  Corpus run() {
    Corpus corpus;
    build_pool();
    corpus.tool_pool = pool_;
    const auto n_irrelevant = static_cast<std::size_t>(
        static_cast<double>(cfg_.n_examples) * cfg_.irrelevance_fraction + 0.5);
    std::vector<char> irrelevant(cfg_.n_examples, 0);
    for (std::size_t i = 0; i < n_irrelevant && i < cfg_.n_examples; ++i) irrelevant[i] = 1;
    rng_.shuffle(std::span(irrelevant));
    for (std::size_t i = 0; i < cfg_.n_examples; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s-%04zu", cfg_.id_prefix.c_str(), i);
      Example ex = irrelevant[i] ? make_irrelevance(id) : make_relevant(id);
      validate_example(ex);
      corpus.examples.push_back(std::move(ex));
    }
    return corpus;
  }

 private:
  struct PoolTool {
    std::size_t verb;
    std::size_t noun;
    std::vector<std::size_t> params;
  };

  void build_pool() {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t v = 0; v < kVerbs.size(); ++v) {
      for (std::size_t n = 0; n < kNouns.size(); ++n) pairs.emplace_back(v, n);
    }
    rng_.shuffle(std::span(pairs));
    for (std::size_t k = 0; k < cfg_.tool_pool_size && k < pairs.size(); ++k) {
      PoolTool pt{pairs[k].first, pairs[k].second, {}};
      std::size_t n_params = static_cast<std::size_t>(rng_.uniform_int(1, 3));
      std::vector<std::size_t> order(kParams.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng_.shuffle(std::span(order));
      std::size_t strings = 0;
      for (std::size_t idx : order) {
        if (pt.params.size() == n_params) break;
        if (kParams[idx].type == ParamType::String) {
          if (strings == 2) continue;
          ++strings;
        }
        pt.params.push_back(idx);
      }
      meta_.push_back(pt);
      pool_.push_back(make_spec(pt));
    }
  }

  ToolSpec make_spec(const PoolTool& pt) {
    const Verb& verb = kVerbs[pt.verb];
    const Noun& noun = kNouns[pt.noun];
    ToolSpec spec;
    spec.name = std::string(verb.word) + "_" + noun.word;
    std::string desc = std::string(verb.third_person) + " the " + noun.word + " (" +
                       noun.synonym + ") for a given ";
    for (std::size_t i = 0; i < pt.params.size(); ++i) {
      const ParamTemplate& t = kParams[pt.params[i]];
      if (i > 0) desc += (i + 1 == pt.params.size()) ? " and " : ", ";
      desc += param_words(t.name);
      ParamSpec p;
      p.name = t.name;
      p.type = t.type;
      p.description = t.description;
      // Optional parameters are always mentioned when set, so gold stays recoverable.
      p.required = i == 0 || !rng_.bernoulli(0.25);
      if (t.type == ParamType::Enum) {
        for (const char* c : t.choices) p.enum_values.emplace_back(c);
      }
      spec.parameters.push_back(std::move(p));
    }
    spec.description = desc + ".";
    return spec;
  }

  /// Draws a value for a parameter, avoiding surface forms already used.
  std::pair<Value, std::string> draw_value(const ParamTemplate& t, std::set<std::string>& used) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Value v;
      std::string surface;
      switch (t.kind) {
        case ValueKind::City: v = std::string(kCities[rng_.uniform_index(kCities.size())]); break;
        case ValueKind::Person: v = std::string(kPeople[rng_.uniform_index(kPeople.size())]); break;
        case ValueKind::Word: v = std::string(kWords[rng_.uniform_index(kWords.size())]); break;
        case ValueKind::Symbol: v = std::string(kSymbols[rng_.uniform_index(kSymbols.size())]); break;
        case ValueKind::Date: {
          char buf[16];
          std::snprintf(buf, sizeof(buf), "2025-%02d-%02d", static_cast<int>(rng_.uniform_int(1, 12)),
                        static_cast<int>(rng_.uniform_int(1, 28)));
          v = std::string(buf);
          break;
        }
        case ValueKind::Count: v = static_cast<std::int64_t>(rng_.uniform_int(1, 40)); break;
        case ValueKind::Amount: v = static_cast<double>(rng_.uniform_int(10, 999)) + 0.5; break;
        case ValueKind::Flag: v = rng_.bernoulli(0.5); break;
        case ValueKind::Choice: v = std::string(t.choices[rng_.uniform_index(t.choices.size())]); break;
      }
      if (t.type == ParamType::String) {
        surface = render_value(v);  // quoted
      } else if (const auto* s = std::get_if<std::string>(&v)) {
        surface = *s;
      } else {
        surface = render_value(v);
      }
      if (t.kind == ValueKind::Flag || used.insert(surface).second) return {v, surface};
    }
    throw PreconditionError("value vocabulary exhausted");
  }

  std::string sentence_for(const PoolTool& pt, const ToolSpec& spec, bool first,
                           std::set<std::string>& used, ToolCall& call) {
    const Verb& verb = kVerbs[pt.verb];
    const Noun& noun = kNouns[pt.noun];
    std::string lead = first ? kFirstLeads[rng_.uniform_index(kFirstLeads.size())]
                             : kNextLeads[rng_.uniform_index(kNextLeads.size())];
    std::string verb_word = rng_.bernoulli(0.25) ? verb.synonyms[rng_.uniform_index(2)] : verb.word;
    std::string noun_word = rng_.bernoulli(0.2) ? noun.synonym : noun.word;
    call.tool_name = spec.name;
    std::vector<std::string> mentions;
    for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
      const ParamSpec& p = spec.parameters[i];
      if (!p.required && rng_.bernoulli(0.5)) continue;
      auto [value, surface] = draw_value(kParams[pt.params[i]], used);
      call.arguments.push_back(Argument{p.name, value});
      mentions.push_back(param_words(p.name) + " " + surface);
    }
    std::string out = lead + " " + verb_word + " the " + noun_word;
    if (!mentions.empty()) {
      std::vector<std::size_t> order(mentions.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng_.shuffle(std::span(order));
      out += " with ";
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0) out += " and ";
        out += mentions[order[i]];
      }
    }
    out += lead == "Can you" ? "?" : ".";
    return out;
  }

  std::vector<std::size_t> pick_distinct(std::size_t k, const std::vector<std::size_t>& from) {
    std::vector<std::size_t> items = from;
    rng_.shuffle(std::span(items));
    items.resize(std::min(k, items.size()));
    return items;
  }

  Example make_relevant(const std::string& id) {
    Example ex;
    ex.id = id;
    const std::size_t max_tools = std::min(cfg_.max_tools_per_example, pool_.size());
    const auto n_tools = static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(max_tools)));
    const auto n_calls = static_cast<std::size_t>(
        rng_.uniform_int(1, static_cast<std::int64_t>(std::min(cfg_.max_calls, n_tools))));
    std::vector<std::size_t> all(pool_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> chosen = pick_distinct(n_tools, all);
    for (std::size_t idx : chosen) ex.tools.push_back(pool_[idx]);
    std::string query;
    if (rng_.bernoulli(0.3)) query = std::string(kChitChat[rng_.uniform_index(kChitChat.size())]) + " ";
    std::set<std::string> used;
    for (std::size_t c = 0; c < n_calls; ++c) {
      ToolCall call;
      std::size_t idx = chosen[c];
      if (c > 0) query += " ";
      query += sentence_for(meta_[idx], pool_[idx], c == 0, used, call);
      ex.gold.push_back(Step::call(std::move(call)));
    }
    ex.gold.push_back(Step::terminal());
    ex.query = std::move(query);
    // Toolset order must not reveal which tools are called.
    rng_.shuffle(std::span(ex.tools));
    return ex;
  }

  Example make_irrelevance(const std::string& id) {
    Example ex;
    ex.id = id;
    const std::size_t target = rng_.uniform_index(pool_.size());
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (meta_[i].noun != meta_[target].noun) candidates.push_back(i);
    }
    if (candidates.empty()) {
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (i != target) candidates.push_back(i);
      }
    }
    const std::size_t max_tools = std::min(cfg_.max_tools_per_example, candidates.size());
    const auto n_tools = static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(max_tools)));
    for (std::size_t idx : pick_distinct(n_tools, candidates)) ex.tools.push_back(pool_[idx]);
    std::set<std::string> used;
    ToolCall unused;
    std::string query;
    if (rng_.bernoulli(0.3)) query = std::string(kChitChat[rng_.uniform_index(kChitChat.size())]) + " ";
    query += sentence_for(meta_[target], pool_[target], true, used, unused);
    ex.query = std::move(query);
    ex.gold = {Step::refuse(), Step::terminal()};
    return ex;
  }

  const CorpusConfig& cfg_;
  Rng rng_;
  std::vector<PoolTool> meta_;
  std::vector<ToolSpec> pool_;
};

}  // namespace

void CorpusConfig::validate() const {
  if (n_examples == 0 || tool_pool_size == 0 || max_tools_per_example == 0 || max_calls == 0) {
    throw PreconditionError("corpus counts must be positive");
  }
  if (!(irrelevance_fraction >= 0.0 && irrelevance_fraction <= 1.0)) {
    throw PreconditionError("irrelevance_fraction must lie in [0,1]");
  }
  if (tool_pool_size > kVerbs.size() * kNouns.size()) {
    throw PreconditionError("tool_pool_size exceeds the verb/noun vocabulary");
  }
  if (irrelevance_fraction > 0.0 && tool_pool_size < 2) {
    throw PreconditionError("irrelevance examples need at least two pool tools");
  }
}

Corpus generate_corpus(const CorpusConfig& config) {
  config.validate();
  return Generator(config).run();
}

}  // namespace toolrft
