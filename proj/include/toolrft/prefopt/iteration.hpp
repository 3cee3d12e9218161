#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "toolrft/buffer/replay_buffer.hpp"
#include "toolrft/prefopt/losses.hpp"
#include "toolrft/search/mcts.hpp"

namespace toolrft {

/// Which policy each iteration's reference is frozen from.
enum class ReferenceMode { Latest, Warmup };

std::string_view to_string(ReferenceMode mode);
ReferenceMode parse_reference_mode(std::string_view name);

struct IterationOptions {
  std::size_t iteration = 1;
  ReferenceMode reference = ReferenceMode::Latest;
  /// Required when reference == Warmup.
  ReferencePolicy warmup_reference;
  PerplexityOptions perplexity;
  bool keep_trees = false;
};

struct IterationReport {
  std::size_t iteration = 0;
  std::string algorithm;
  double alpha_percent = 0;
  std::vector<std::string> sampled_ids;
  double mean_complexity = 0;          // over the whole refreshed buffer
  double mean_sampled_complexity = 0;  // over the sampled hard examples
  std::size_t tree_nodes = 0;
  std::size_t pairs = 0;
  double initial_margin = 0;  // mean implicit reward margin before the first update
  double loss_before = 0;
  double loss_after = 0;
  std::vector<double> epoch_losses;  // mean minibatch pre-update loss per epoch
  std::size_t gradient_steps = 0;
  bool noop = false;  // no pairs were generated

  Json to_json() const;
};

struct IterationResult {
  IterationReport report;
  std::vector<PreferencePair> pairs;
  std::vector<SearchTree> trees;  // filled when keep_trees is set
};

/// refresh -> sample_hard(alpha) -> run_search per example -> extract pairs ->
/// freeze reference -> preference optimization. Updates `policy` in place and
/// leaves the buffer stale.
IterationResult run_iteration(LinearPolicy& policy, ReplayBuffer& buffer,
                              const SearchConfig& search_config, const PrefConfig& pref_config,
                              double alpha_percent, const IterationOptions& options = {});

}  // namespace toolrft
