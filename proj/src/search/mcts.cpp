#include "toolrft/search/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toolrft/error.hpp"
#include "toolrft/toolspace/grading.hpp"

namespace toolrft {
namespace {

bool closed(const SearchState& state, const SearchConfig& config) {
  return state.is_terminal() || state.depth() >= config.max_depth;
}

double likelihood_confidence(double path_log_prob, std::size_t depth) {
  if (depth == 0) return 1.0;
  return Confidence(std::exp(path_log_prob / static_cast<double>(depth))).value();
}

Reward reward_for(const SearchState& state, double path_log_prob, const Policy& policy,
                  const SelfEvaluator* evaluator) {
  Reward r;
  r.outcome = outcome_correctness(state, state.example());
  r.confidence = evaluator ? evaluator->evaluate(policy, state).value()
                           : likelihood_confidence(path_log_prob, state.depth());
  return r;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(c_puct >= 0.0) || !std::isfinite(c_puct)) throw PreconditionError("c_puct must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw PreconditionError("gamma must lie in [0, 1]");
  if (n_simulations == 0) throw PreconditionError("n_simulations must be positive");
  if (max_depth == 0) throw PreconditionError("max_depth must be positive");
  if (expansion_width < 2) throw PreconditionError("expansion_width must be at least 2");
  if (!(epsilon_pref > 0.0)) throw PreconditionError("epsilon_pref must be positive");
}

double outcome_correctness(const SearchState& state, const Example& example) {
  if (example.is_irrelevance()) return state.has_refused() ? 1.0 : 0.0;
  return match_response(state.steps(), example.gold, example.tools).outcome();
}

Reward state_reward(const SearchState& state, const Example& example, const Policy& policy) {
  static const LikelihoodEvaluator evaluator;
  return state_reward(state, example, policy, evaluator);
}

Reward state_reward(const SearchState& state, const Example& example, const Policy& policy,
                    const SelfEvaluator& evaluator) {
  Reward r;
  r.outcome = outcome_correctness(state, example);
  r.confidence = evaluator.evaluate(policy, state).value();
  return r;
}

SearchTree::SearchTree(SearchNode root, std::string example_id)
    : example_id_(std::move(example_id)) {
  nodes_.push_back(std::move(root));
}

std::size_t SearchTree::add_node(SearchNode node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::size_t SearchTree::edge_to(std::size_t child) const {
  const SearchNode& c = node(child);
  if (!c.parent) throw PreconditionError("root has no incoming edge");
  const auto& edges = node(*c.parent).children;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].child == child) return i;
  }
  throw PreconditionError("child not linked from its parent");
}

Json SearchTree::to_json() const {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const SearchNode& n = nodes_[i];
    Json j;
    j["id"] = i;
    j["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
    j["depth"] = n.state.depth();
    j["step"] = n.state.depth() == 0 ? Json(nullptr) : toolrft::to_json(n.state.steps().back());
    j["N"] = n.visits;
    j["V"] = n.value;
    j["O"] = n.reward.outcome;
    j["C"] = n.reward.confidence;
    j["R"] = n.reward.total();
    j["terminal"] = n.terminal;
    Json edges = Json::array();
    for (const SearchEdge& e : n.children) {
      edges.push_back(Json{{"child", e.child}, {"prior", e.prior}, {"r", e.reward}, {"Q", e.q}});
    }
    j["children"] = std::move(edges);
    nodes.push_back(std::move(j));
  }
  return Json{{"example_id", example_id_}, {"nodes", std::move(nodes)}};
}

double puct_score(double q, double prior, std::size_t parent_visits, std::size_t child_visits,
                  double c_puct) {
  return q + c_puct * prior * std::sqrt(static_cast<double>(parent_visits)) /
                 (1.0 + static_cast<double>(child_visits));
}

std::size_t select_child(const SearchTree& tree, std::size_t node, const SearchConfig& config) {
  const SearchNode& n = tree.node(node);
  if (n.children.empty()) throw PreconditionError("select_child on a node without children");
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const SearchEdge& e = n.children[i];
    const double s =
        puct_score(e.q, e.prior, n.visits, tree.node(e.child).visits, config.c_puct);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> expand_node(SearchTree& tree, std::size_t node, const Policy& policy,
                                     const SearchConfig& config, const SelfEvaluator* evaluator) {
  if (tree.node(node).terminal) throw PreconditionError("cannot expand a terminal node");
  if (tree.node(node).expanded) throw PreconditionError("node is already expanded");

  const SearchState state = tree.node(node).state;
  const double base_log_prob = tree.node(node).path_log_prob;
  const double base_reward = tree.node(node).reward.total();
  StepDistribution dist = policy.step_distribution(state);

  std::vector<std::size_t> order(dist.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t width = std::min(config.expansion_width, order.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist.probs[a] > dist.probs[b]; });
  order.resize(width);
  std::sort(order.begin(), order.end());

  std::vector<SearchEdge> edges;
  std::vector<std::size_t> created;
  for (std::size_t idx : order) {
    SearchNode child{state.extend(dist.candidates[idx]), node};
    child.path_log_prob = base_log_prob + dist.log_probs[idx];
    child.reward = reward_for(child.state, child.path_log_prob, policy, evaluator);
    child.terminal = closed(child.state, config);
    const double r = child.reward.total() - base_reward;
    const std::size_t id = tree.add_node(std::move(child));
    edges.push_back(SearchEdge{dist.candidates[idx], dist.probs[idx], r, r, id});
    created.push_back(id);
  }
  SearchNode& n = tree.node(node);
  n.children = std::move(edges);
  n.expanded = true;
  return created;
}

RolloutResult rollout(const SearchState& from, double prefix_log_prob, const Policy& policy,
                      const SearchConfig& config, Rng& rng) {
  RolloutResult out{from, prefix_log_prob};
  while (!closed(out.state, config)) {
    const std::vector<double> logp = policy.candidate_log_probs(out.state);
    std::vector<double> probs(logp.size());
    std::transform(logp.begin(), logp.end(), probs.begin(), [](double l) { return std::exp(l); });
    const std::size_t pick = rng.categorical(probs);
    const std::vector<const Step*> refs = candidate_refs(out.state);
    out.log_prob += logp[pick];
    out.state = out.state.extend(*refs[pick]);
  }
  return out;
}

void backup_path(SearchTree& tree, std::size_t leaf, double leaf_value, const SearchConfig& config) {
  std::size_t current = leaf;
  SearchNode& l = tree.node(leaf);
  l.visits += 1;
  if (!std::any_of(l.children.begin(), l.children.end(),
                   [&](const SearchEdge& e) { return tree.node(e.child).visits > 0; })) {
    l.value = leaf_value;
  }
  while (tree.node(current).parent) {
    const std::size_t parent = *tree.node(current).parent;
    const std::size_t edge = tree.edge_to(current);
    SearchNode& p = tree.node(parent);
    p.children[edge].q = p.children[edge].reward + config.gamma * tree.node(current).value;
    p.visits += 1;
    double weighted = 0.0;
    double total = 0.0;
    for (const SearchEdge& e : p.children) {
      const double n = static_cast<double>(tree.node(e.child).visits);
      weighted += n * e.q;
      total += n;
    }
    if (total > 0.0) p.value = weighted / total;
    current = parent;
  }
}

SearchTree run_search(const Example& example, const Policy& policy, const SearchConfig& config,
                      const SelfEvaluator* evaluator, const SimulationObserver& observer) {
  config.validate();
  if (config.max_depth > policy.config().max_depth) {
    throw PreconditionError("search max_depth exceeds the policy's max_depth");
  }
  SearchNode root{SearchState::root(example, policy.config()), std::nullopt};
  root.reward = reward_for(root.state, 0.0, policy, evaluator);
  root.terminal = closed(root.state, config);
  SearchTree tree(std::move(root), example.id);
  Rng rng(config.seed);

  for (std::size_t sim = 0; sim < config.n_simulations; ++sim) {
    std::size_t current = SearchTree::kRoot;
    while (tree.node(current).expanded && !tree.node(current).terminal) {
      current = tree.node(current).children[select_child(tree, current, config)].child;
    }
    if (!tree.node(current).terminal) {
      expand_node(tree, current, policy, config, evaluator);
      current = tree.node(current).children[select_child(tree, current, config)].child;
    }
    const SearchNode& leaf = tree.node(current);
    double leaf_value = leaf.reward.total();
    if (!leaf.terminal) {
      const RolloutResult end = rollout(leaf.state, leaf.path_log_prob, policy, config, rng);
      leaf_value = reward_for(end.state, end.log_prob, policy, evaluator).total();
    }
    backup_path(tree, current, leaf_value, config);
    if (observer) observer(tree, sim);
  }
  return tree;
}

std::vector<PreferencePair> extract_preferences(const SearchTree& tree, double epsilon_pref) {
  std::vector<PreferencePair> pairs;
  for (const SearchNode& n : tree.nodes()) {
    const SearchEdge* best = nullptr;
    const SearchEdge* worst = nullptr;
    std::size_t visited = 0;
    for (const SearchEdge& e : n.children) {
      if (tree.node(e.child).visits == 0) continue;
      ++visited;
      if (!best || e.q > best->q) best = &e;
      if (!worst || e.q < worst->q) worst = &e;
    }
    if (visited < 2 || best == worst) continue;
    if (best->q - worst->q < epsilon_pref) continue;
    pairs.push_back(PreferencePair{n.state, best->step, worst->step, best->q, worst->q});
  }
  return pairs;
}

Json to_json(const PreferencePair& pair) {
  Json j;
  j["example_id"] = pair.example_id();
  j["prefix"] = steps_to_json(pair.context.steps());
  j["chosen"] = to_json(pair.chosen);
  j["rejected"] = to_json(pair.rejected);
  j["q_chosen"] = pair.q_chosen;
  j["q_rejected"] = pair.q_rejected;
  return j;
}

void write_preferences_jsonl(const std::filesystem::path& path,
                             std::span<const PreferencePair> pairs) {
  std::vector<Json> lines;
  lines.reserve(pairs.size());
  for (const PreferencePair& p : pairs) lines.push_back(to_json(p));
  write_jsonl(path, lines);
}

}  // namespace toolrft
