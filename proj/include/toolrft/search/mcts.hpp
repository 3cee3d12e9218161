#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/rng.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {

struct SearchConfig {
  double c_puct = 1.0;
  double gamma = 1.0;
  std::size_t n_simulations = 64;
  std::size_t max_depth = 8;
  std::size_t expansion_width = 4;
  std::uint64_t seed = 0;
  double epsilon_pref = 1e-6;

  /// Throws PreconditionError when a field is out of range.
  void validate() const;
};

/// R(s) = O(s) + C(s).
struct Reward {
  double outcome = 0;
  double confidence = 0;

  double total() const { return outcome + confidence; }
};

/// O from grading the steps emitted so far against the gold; C from the
/// default likelihood self-evaluator.
Reward state_reward(const SearchState& state, const Example& example, const Policy& policy);
Reward state_reward(const SearchState& state, const Example& example, const Policy& policy,
                    const SelfEvaluator& evaluator);

/// Graded outcome O for a (possibly partial) response.
double outcome_correctness(const SearchState& state, const Example& example);

struct SearchEdge {
  Step step;
  double prior = 0;   // p(a | s) at expansion time
  double reward = 0;  // r(s, a) = R(s') - R(s)
  double q = 0;       // Q(s, a), initialised to r
  std::size_t child = 0;
};

struct SearchNode {
  SearchNode(SearchState s, std::optional<std::size_t> parent_index)
      : state(std::move(s)), parent(parent_index) {}

  SearchState state;
  std::optional<std::size_t> parent;
  std::size_t visits = 0;  // N(s)
  double value = 0;        // V(s)
  Reward reward;
  double path_log_prob = 0;  // sum of log p along the prefix
  bool expanded = false;
  bool terminal = false;
  std::vector<SearchEdge> children;  // candidate order
};

/// Nodes live in an arena; index 0 is the root.
class SearchTree {
 public:
  SearchTree(SearchNode root, std::string example_id);

  static constexpr std::size_t kRoot = 0;

  const SearchNode& node(std::size_t i) const { return nodes_.at(i); }
  SearchNode& node(std::size_t i) { return nodes_.at(i); }
  std::span<const SearchNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const std::string& example_id() const { return example_id_; }

  std::size_t add_node(SearchNode node);

  /// Edge index of `child` within its parent's children.
  std::size_t edge_to(std::size_t child) const;

  /// Debug dump: N, V, R and per-edge prior / r / Q for every node.
  Json to_json() const;

 private:
  std::vector<SearchNode> nodes_;
  std::string example_id_;
};

double puct_score(double q, double prior, std::size_t parent_visits, std::size_t child_visits,
                  double c_puct);

/// Edge index maximizing the PUCT score; ties go to the earliest child.
std::size_t select_child(const SearchTree& tree, std::size_t node, const SearchConfig& config);

/// Adds children for the top expansion_width candidates by probability and
/// returns their node indices. Throws on terminal or already expanded nodes.
std::vector<std::size_t> expand_node(SearchTree& tree, std::size_t node, const Policy& policy,
                                     const SearchConfig& config,
                                     const SelfEvaluator* evaluator = nullptr);

struct RolloutResult {
  SearchState state;      // terminal state
  double log_prob = 0;    // log-probability of the full path from the root
};

/// Samples steps until a terminal step or max_depth. `prefix_log_prob` is the
/// log-probability of `from`'s own steps.
RolloutResult rollout(const SearchState& from, double prefix_log_prob, const Policy& policy,
                      const SearchConfig& config, Rng& rng);

/// N += 1 along leaf -> root; Q(s,a) = r + gamma V(s'); V(s) = visit-weighted
/// mean of child Q; the leaf's V is seeded with leaf_value.
void backup_path(SearchTree& tree, std::size_t leaf, double leaf_value, const SearchConfig& config);

/// Called after every simulation with the tree in its post-backup state.
using SimulationObserver = std::function<void(const SearchTree&, std::size_t simulation)>;

SearchTree run_search(const Example& example, const Policy& policy, const SearchConfig& config,
                      const SelfEvaluator* evaluator = nullptr,
                      const SimulationObserver& observer = {});

struct PreferencePair {
  SearchState context;  // example plus the shared prefix
  Step chosen;
  Step rejected;
  double q_chosen = 0;
  double q_rejected = 0;

  const std::string& example_id() const { return context.example().id; }
};

/// (argmax-Q, argmin-Q) among visited children of every node with at least
/// two of them, kept when the gap reaches epsilon_pref.
std::vector<PreferencePair> extract_preferences(const SearchTree& tree, double epsilon_pref);

Json to_json(const PreferencePair& pair);
void write_preferences_jsonl(const std::filesystem::path& path,
                             std::span<const PreferencePair> pairs);

}  // namespace toolrft
