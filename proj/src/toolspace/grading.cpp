#include "toolrft/toolspace/grading.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace toolrft {
namespace {

std::optional<double> as_real(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::optional<double> parse_real(const std::string& s) {
  try {
    std::size_t used = 0;
    double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (...) {
  }
  return std::nullopt;
}

/// Canonical comparable form of `v` under a declared type, if coercible.
std::optional<Value> coerce(const Value& v, ParamType type) {
  switch (type) {
    case ParamType::String:
    case ParamType::Enum:
      if (const auto* s = std::get_if<std::string>(&v)) return Value(*s);
      return std::nullopt;
    case ParamType::Boolean:
      if (const auto* b = std::get_if<bool>(&v)) return Value(*b);
      if (const auto* s = std::get_if<std::string>(&v)) {
        if (*s == "true") return Value(true);
        if (*s == "false") return Value(false);
      }
      return std::nullopt;
    case ParamType::Integer: {
      std::optional<double> r = as_real(v);
      if (!r) {
        if (const auto* s = std::get_if<std::string>(&v)) r = parse_real(*s);
      }
      if (r && std::nearbyint(*r) == *r) return Value(static_cast<std::int64_t>(*r));
      return std::nullopt;
    }
    case ParamType::Number: {
      std::optional<double> r = as_real(v);
      if (!r) {
        if (const auto* s = std::get_if<std::string>(&v)) r = parse_real(*s);
      }
      if (r) return Value(*r);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool is_action(const Step& s) { return s.is_call() || s.is_refuse(); }

}  // namespace

bool values_match(const Value& predicted, const Value& gold, const ParamSpec* declared) {
  if (declared != nullptr) {
    auto p = coerce(predicted, declared->type);
    auto g = coerce(gold, declared->type);
    if (p && g) return *p == *g;
    // Gold outside its declared type: fall back to untyped comparison.
  }
  auto pr = as_real(predicted);
  auto gr = as_real(gold);
  if (pr && gr) return *pr == *gr;
  return predicted == gold;
}

bool call_matches(const ToolCall& predicted, const ToolCall& gold,
                  std::span<const ToolSpec> toolset) {
  if (predicted.tool_name != gold.tool_name) return false;
  const ToolSpec* spec = nullptr;
  for (const auto& t : toolset) {
    if (t.name == gold.tool_name) spec = &t;
  }
  for (const auto& arg : gold.arguments) {
    const Value* pv = predicted.find(arg.name);
    if (pv == nullptr) return false;
    const ParamSpec* declared = spec ? spec->find_param(arg.name) : nullptr;
    if (!values_match(*pv, arg.value, declared)) return false;
  }
  return true;
}

MatchReport match_response(std::span<const Step> predicted, std::span<const Step> gold,
                           std::span<const ToolSpec> toolset) {
  std::vector<const Step*> pred_actions;
  std::vector<const Step*> gold_actions;
  for (const auto& s : predicted) {
    if (is_action(s)) pred_actions.push_back(&s);
  }
  for (const auto& s : gold) {
    if (is_action(s)) gold_actions.push_back(&s);
  }
  MatchReport report;
  report.gold_calls = gold_actions.size();
  report.predicted_calls = pred_actions.size();
  for (std::size_t i = 0; i < gold_actions.size(); ++i) {
    CallVerdict verdict;
    verdict.gold_index = i;
    verdict.predicted = i < pred_actions.size();
    if (verdict.predicted) {
      const Step& p = *pred_actions[i];
      const Step& g = *gold_actions[i];
      if (g.is_refuse()) {
        verdict.matched = p.is_refuse();
      } else {
        verdict.matched = p.is_call() && call_matches(p.as_call(), g.as_call(), toolset);
      }
    }
    if (verdict.matched) ++report.matched_calls;
    report.per_call.push_back(verdict);
  }
  report.exact = report.matched_calls == report.gold_calls &&
                 report.predicted_calls == report.gold_calls;
  return report;
}

}  // namespace toolrft
