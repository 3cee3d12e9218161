#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

struct CorpusConfig {
  std::size_t n_examples = 600;
  std::size_t tool_pool_size = 24;
  std::size_t max_tools_per_example = 8;
  std::size_t max_calls = 3;
  double irrelevance_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string id_prefix = "ex";

  /// Throws PreconditionError on non-positive counts or a fraction outside [0,1].
  void validate() const;
};

struct Corpus {
  std::vector<ToolSpec> tool_pool;
  std::vector<Example> examples;
};

/// Templated synthetic tool-use corpus. Each query is rendered from its gold
/// calls, so every gold argument value appears in the query (or in the
/// tool's enum / boolean domain). Irrelevance examples pair a query with a
/// toolset that contains no applicable tool; their gold is [refuse, terminal].
Corpus generate_corpus(const CorpusConfig& config);

}  // namespace toolrft
