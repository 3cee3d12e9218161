#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/rng.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {

enum class Decoding { Greedy, Sample };

struct EvalOptions {
  Decoding decoding = Decoding::Greedy;
  std::uint64_t seed = 0;  // used by Sample
};

struct EvalReport {
  std::size_t n = 0;
  std::size_t n_easy = 0;
  std::size_t n_medium = 0;
  std::size_t n_hard = 0;
  double accuracy_overall = 0;
  double accuracy_easy = 0;
  double accuracy_medium = 0;
  double accuracy_hard = 0;
  std::size_t n_relevance = 0;    // examples that need a tool
  std::size_t n_irrelevance = 0;  // refuse-gold examples
  double relevance_rate = 0;      // needed a tool and did not refuse
  double irrelevance_rate = 0;    // refuse-gold and refused

  Json to_json() const;
};

/// Decodes one response from the root of `example`.
std::vector<Step> decode(const Policy& policy, const Example& example, Decoding decoding,
                         Rng* rng = nullptr);

/// Exact-match accuracy overall and per difficulty bucket of `eval_set`
/// (split by the eval set's own difficulty thirds). Needs at least 3 examples.
EvalReport evaluate(const Policy& policy, std::span<const Example> eval_set,
                    const EvalOptions& options = {});

}  // namespace toolrft
