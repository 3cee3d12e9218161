#include "toolrft/policy/features.hpp"

#include <algorithm>
#include <cctype>

#include "toolrft/error.hpp"

namespace toolrft {
namespace {

/// Prefix-dependent quantities shared by all candidates of one state.
struct PrefixSummary {
  std::vector<const ToolCall*> calls;
  std::set<std::string> used_tools;
  std::set<std::string> used_surfaces;
  double uncovered = 0;
};

std::string lowered(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

PrefixSummary summarize(const SearchState& state) {
  PrefixSummary p;
  for (const auto& s : state.steps()) {
    if (!s.is_call()) continue;
    p.calls.push_back(&s.as_call());
    p.used_tools.insert(s.as_call().tool_name);
    for (const auto& a : s.as_call().arguments) p.used_surfaces.insert(lowered(value_surface(a.value)));
  }
  const auto& surfaces = state.context().query.value_surfaces;
  if (!surfaces.empty()) {
    std::size_t open = 0;
    for (const auto& v : surfaces) open += p.used_surfaces.count(v) == 0 ? 1 : 0;
    p.uncovered = static_cast<double>(open) / static_cast<double>(surfaces.size());
  }
  return p;
}

StaticCallFeatures lookup_static(const TaskContext& ctx, const Step& step) {
  for (std::size_t i = 0; i < ctx.calls.size(); ++i) {
    if (&ctx.calls[i] == &step || ctx.calls[i] == step) return ctx.call_features[i];
  }
  throw UnreachableStepError("call is not an enumerated candidate");
}

void fill_row(const SearchState& state, const PrefixSummary& prefix, const Step& step,
              const StaticCallFeatures* call_static, std::span<double> row) {
  using namespace feature;
  std::fill(row.begin(), row.end(), 0.0);
  const TaskContext& ctx = state.context();
  switch (step.kind()) {
    case Step::Kind::Call: {
      const StaticCallFeatures& f = *call_static;
      row[kKindCall] = 1.0;
      row[kNameOverlap] = f.name_overlap;
      row[kDescriptionOverlap] = f.description_overlap;
      row[kValueInQuery] = f.value_in_query;
      row[kBinding] = f.binding;
      row[kParamCoverage] = f.param_coverage;
      if (f.own_sentence && *f.own_sentence == prefix.calls.size()) row[kOrderAlignment] = 1.0;
      row[kToolRepeat] = prefix.used_tools.count(step.as_call().tool_name) ? 1.0 : 0.0;
      if (!f.surfaces.empty()) {
        std::size_t reused = 0;
        for (const auto& s : f.surfaces) reused += prefix.used_surfaces.count(lowered(s));
        row[kValueReuse] = static_cast<double>(reused) / static_cast<double>(f.surfaces.size());
      }
      break;
    }
    case Step::Kind::Text:
      row[kKindText] = 1.0;
      break;
    case Step::Kind::Refuse:
      row[kKindRefuse] = 1.0;
      row[kRefuseRelevance] = ctx.max_tool_overlap;
      break;
    case Step::Kind::Terminal: {
      row[kKindTerminal] = 1.0;
      row[kTerminalUncovered] = prefix.uncovered;
      const std::size_t depth = std::min(state.depth(), state.max_depth());
      row[kTerminalDepth + std::min(depth, row.size() - kTerminalDepth - 1)] = 1.0;
      break;
    }
  }
}

}  // namespace

std::size_t feature_dim(std::size_t max_depth) { return feature::kTerminalDepth + max_depth + 1; }

std::size_t max_depth_for_dim(std::size_t dim) {
  if (dim < feature::kTerminalDepth + 2) throw PreconditionError("feature dimension too small");
  return dim - feature::kTerminalDepth - 1;
}

FeatureMatrix featurize(const SearchState& state, std::span<const Step* const> candidates) {
  const TaskContext& ctx = state.context();
  FeatureMatrix m;
  m.rows = candidates.size();
  m.cols = feature_dim(ctx.config.max_depth);
  m.data.assign(m.rows * m.cols, 0.0);
  PrefixSummary prefix = summarize(state);
  const Step* base = ctx.calls.data();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Step* s = candidates[i];
    const StaticCallFeatures* f = nullptr;
    StaticCallFeatures scratch;
    if (s->is_call()) {
      if (!ctx.calls.empty() && s >= base && s < base + ctx.calls.size()) {
        f = &ctx.call_features[static_cast<std::size_t>(s - base)];
      } else {
        scratch = lookup_static(ctx, *s);
        f = &scratch;
      }
    }
    fill_row(state, prefix, *s, f, std::span<double>(m.data).subspan(i * m.cols, m.cols));
  }
  return m;
}

std::vector<double> step_features(const SearchState& state, const Step& candidate) {
  const Step* ptr = &candidate;
  FeatureMatrix m = featurize(state, std::span<const Step* const>(&ptr, 1));
  return m.data;
}

}  // namespace toolrft
