#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

struct PolicyConfig {
  std::size_t max_depth = 8;
  /// Upper bound on enumerated call candidates per state; refuse/terminal are extra.
  std::size_t candidate_cap = 1024;

  bool operator==(const PolicyConfig&) const = default;
};

/// Lexical view of a query used by candidate enumeration and features.
struct QueryAnalysis {
  std::set<std::string> tokens;                 // lowercase word tokens
  std::string lowered;                          // lowercase query text
  std::vector<std::set<std::string>> valued_sentences;  // sentences mentioning a value
  std::vector<std::string> valued_sentence_text;        // the same sentences, lowercase
  std::vector<std::string> quoted;              // quoted literals, first-appearance order
  std::vector<std::string> numerals;            // bare numeric tokens
  std::vector<std::string> value_surfaces;      // every literal surface the query carries
};

QueryAnalysis analyze_query(const Example& example);

/// Lowercase alphanumeric tokens of `text` ('_' separates).
std::vector<std::string> word_tokens(std::string_view text);

/// Surface form of an argument value as it would appear in a query.
std::string value_surface(const Value& value);

/// Per-candidate quantities that depend only on the example, not on the prefix.
struct StaticCallFeatures {
  double name_overlap = 0;
  double description_overlap = 0;
  double value_in_query = 0;
  double binding = 0;
  double param_coverage = 0;
  std::vector<std::string> name_tokens;
  std::vector<std::string> surfaces;  // argument value surfaces
  std::optional<std::size_t> own_sentence;  // index into valued_sentences
};

/// Immutable per-example data shared by every state of that example.
struct TaskContext {
  Example example;
  PolicyConfig config;
  QueryAnalysis query;
  std::vector<Step> calls;  // enumerated call candidates, deterministic order
  std::vector<StaticCallFeatures> call_features;
  double max_tool_overlap = 0;
};

/// s_t: the example plus the steps emitted so far.
class SearchState {
 public:
  static SearchState root(const Example& example, const PolicyConfig& config = {});
  static SearchState root(std::shared_ptr<const TaskContext> context);

  const Example& example() const { return ctx_->example; }
  const TaskContext& context() const { return *ctx_; }
  std::shared_ptr<const TaskContext> context_ptr() const { return ctx_; }
  std::span<const Step> steps() const { return steps_; }
  std::size_t depth() const { return steps_.size(); }
  std::size_t max_depth() const { return ctx_->config.max_depth; }

  /// Last step is terminal, or depth reached max_depth.
  bool is_terminal() const;
  bool has_refused() const;

  SearchState extend(Step step) const;

  bool operator==(const SearchState& other) const;

 private:
  SearchState(std::shared_ptr<const TaskContext> ctx, std::vector<Step> steps)
      : ctx_(std::move(ctx)), steps_(std::move(steps)) {}

  std::shared_ptr<const TaskContext> ctx_;
  std::vector<Step> steps_;
};

std::shared_ptr<const TaskContext> make_task_context(const Example& example,
                                                    const PolicyConfig& config);

/// Legal next steps, in deterministic order: calls (toolset order, then
/// argument combinations), refuse at depth 0, terminal after one step.
/// After a refusal only terminal is legal. Throws on a terminal state.
std::vector<Step> enumerate_candidates(const SearchState& state);

/// Same candidates as pointers into the shared context (no copies).
std::vector<const Step*> candidate_refs(const SearchState& state);

}  // namespace toolrft
