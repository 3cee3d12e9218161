#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

struct CallVerdict {
  std::size_t gold_index = 0;  // position in the gold action subsequence
  bool predicted = false;      // a prediction exists at this position
  bool matched = false;
};

/// Grading outcome. Actions are tool calls and refusals; matching is
/// positional over the action subsequences of prediction and gold.
struct MatchReport {
  std::size_t matched_calls = 0;
  std::size_t gold_calls = 0;
  std::size_t predicted_calls = 0;
  bool exact = false;
  std::vector<CallVerdict> per_call;

  double outcome() const {
    return gold_calls == 0 ? 0.0
                           : static_cast<double>(matched_calls) / static_cast<double>(gold_calls);
  }
};

/// Value equality after coercion to the declared parameter type. With no
/// declaration, integers and reals compare numerically and other kinds exactly.
bool values_match(const Value& predicted, const Value& gold, const ParamSpec* declared = nullptr);

/// True iff names agree and every gold argument is present in `predicted`
/// with a matching value (order-insensitive).
bool call_matches(const ToolCall& predicted, const ToolCall& gold,
                  std::span<const ToolSpec> toolset = {});

MatchReport match_response(std::span<const Step> predicted, std::span<const Step> gold,
                           std::span<const ToolSpec> toolset = {});

}  // namespace toolrft
