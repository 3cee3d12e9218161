#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/rng.hpp"
#include "toolrft/search/mcts.hpp"
#include "toolrft/toolspace/grading.hpp"
#include "toolrft/toolspace/types.hpp"

namespace toolrft::testing {

inline ToolSpec enum_tool(std::string name, std::string param, std::vector<std::string> values,
                          std::string description = "tool") {
  ToolSpec t;
  t.name = std::move(name);
  t.description = std::move(description);
  ParamSpec p;
  p.name = std::move(param);
  p.type = ParamType::Enum;
  p.enum_values = std::move(values);
  t.parameters.push_back(std::move(p));
  return t;
}

inline Step call_step(std::string name, std::vector<Argument> args) {
  return Step::call(ToolCall{std::move(name), std::move(args)});
}

inline Example make_example(std::string id, std::string query, std::vector<ToolSpec> tools,
                            std::vector<Step> gold) {
  Example e;
  e.id = std::move(id);
  e.query = std::move(query);
  e.tools = std::move(tools);
  e.gold = std::move(gold);
  return e;
}

/// One paint tool with a three-valued colour enum; gold paints red.
inline Example paint_example(std::string id = "paint") {
  return make_example(std::move(id), "Please paint_wall with color red.",
                      {enum_tool("paint_wall", "color", {"red", "green", "blue"})},
                      {call_step("paint_wall", {{"color", std::string("red")}}), Step::terminal()});
}

inline std::vector<double> random_weights(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> w(dim);
  for (double& x : w) x = (rng.uniform01() * 2.0 - 1.0) * scale;
  return w;
}

/// Assigns equal probability to every legal candidate.
class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(PolicyConfig config = {}) : config_(config) {}
  const PolicyConfig& config() const override { return config_; }
  std::vector<double> candidate_log_probs(const SearchState& state) const override {
    const auto n = candidate_refs(state).size();
    return std::vector<double>(n, -std::log(static_cast<double>(n)));
  }

 private:
  PolicyConfig config_;
};

/// Puts all mass on the gold continuation while the prefix follows the gold;
/// uniform elsewhere.
class GoldPolicy final : public Policy {
 public:
  explicit GoldPolicy(PolicyConfig config = {}) : config_(config) {}
  const PolicyConfig& config() const override { return config_; }
  std::vector<double> candidate_log_probs(const SearchState& state) const override {
    const auto refs = candidate_refs(state);
    const auto& gold = state.example().gold;
    const auto steps = state.steps();
    bool on_path = steps.size() < gold.size();
    for (std::size_t i = 0; on_path && i < steps.size(); ++i) on_path = steps[i] == gold[i];
    if (on_path) {
      for (std::size_t i = 0; i < refs.size(); ++i) {
        if (*refs[i] == gold[steps.size()]) {
          std::vector<double> lp(refs.size(), -std::numeric_limits<double>::infinity());
          lp[i] = 0.0;
          return lp;
        }
      }
    }
    return std::vector<double>(refs.size(), -std::log(static_cast<double>(refs.size())));
  }

 private:
  PolicyConfig config_;
};

/// Small example plus a random linear policy whose reachable state space is
/// small enough to enumerate.
struct MicroEnv {
  Example example;
  LinearPolicy policy;
  SearchConfig search;
  std::size_t reachable_states = 0;
};

inline std::size_t count_states(const SearchState& s) {
  if (s.is_terminal()) return 1;
  std::size_t n = 1;
  for (const Step& c : enumerate_candidates(s)) n += count_states(s.extend(c));
  return n;
}

/// Best terminal reward reachable from `s`.
inline double best_terminal_reward(const SearchState& s, const Example& ex, const Policy& policy) {
  if (s.is_terminal()) return state_reward(s, ex, policy).total();
  double best = -std::numeric_limits<double>::infinity();
  for (const Step& c : enumerate_candidates(s)) {
    best = std::max(best, best_terminal_reward(s.extend(c), ex, policy));
  }
  return best;
}

inline std::optional<MicroEnv> micro_env(std::uint64_t seed, std::size_t max_states = 500) {
  Rng rng(derive_seed(99, seed));
  const std::vector<std::string> colors = {"red", "green", "blue"};
  const std::size_t n_tools = 1 + rng.uniform_index(2);
  Example ex;
  ex.id = "micro-" + std::to_string(seed);
  for (std::size_t t = 0; t < n_tools; ++t) {
    const std::size_t nv = 2 + rng.uniform_index(2);
    ex.tools.push_back(enum_tool(t == 0 ? "paint_wall" : "order_lamp", "color",
                                 std::vector<std::string>(colors.begin(), colors.begin() + nv)));
  }
  const std::size_t n_gold = 1 + rng.uniform_index(n_tools);
  std::string query = "Please";
  for (std::size_t g = 0; g < n_gold; ++g) {
    const std::string& c = colors[rng.uniform_index(2)];
    ex.gold.push_back(call_step(ex.tools[g].name, {{"color", c}}));
    query += " " + ex.tools[g].name + " with color " + c + ".";
  }
  ex.gold.push_back(Step::terminal());
  ex.query = query;

  PolicyConfig pc;
  pc.max_depth = 3;
  LinearPolicy policy(pc, PolicyParams{random_weights(rng, feature_dim(pc.max_depth), 2.0)});
  const std::size_t states = count_states(SearchState::root(ex, pc));
  if (states > max_states) return std::nullopt;

  SearchConfig sc;
  sc.max_depth = pc.max_depth;
  sc.expansion_width = 64;
  sc.n_simulations = 20000;
  sc.gamma = 1.0;
  sc.c_puct = 1.0;
  sc.seed = seed;
  return MicroEnv{std::move(ex), std::move(policy), sc, states};
}

/// Largest |V(s) - sum N_c Q_c / sum N_c| over visited nodes with visited children.
inline double backup_identity_error(const SearchTree& tree) {
  double worst = 0.0;
  for (const SearchNode& n : tree.nodes()) {
    double num = 0.0;
    double den = 0.0;
    for (const SearchEdge& e : n.children) {
      const auto nc = static_cast<double>(tree.node(e.child).visits);
      num += nc * e.q;
      den += nc;
    }
    if (n.visits == 0 || den == 0.0) continue;
    worst = std::max(worst, std::abs(n.value - num / den));
  }
  return worst;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Largest relative error between `analytic` and central differences of `f`.
inline double max_fd_error(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> theta, const std::vector<double>& analytic,
                           double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double keep = theta[k];
    theta[k] = keep + h;
    const double up = f(theta);
    theta[k] = keep - h;
    const double down = f(theta);
    theta[k] = keep;
    worst = std::max(worst, relative_error((up - down) / (2 * h), analytic[k]));
  }
  return worst;
}

inline std::string random_identifier(Rng& rng) {
  static const std::string head = "abcdefghijklmnopqrstuvwxyz_";
  static const std::string tail = "abcdefghijklmnopqrstuvwxyz_0123456789";
  std::string s(1, head[rng.uniform_index(head.size())]);
  const auto n = rng.uniform_index(10);
  for (std::uint64_t i = 0; i < n; ++i) s += tail[rng.uniform_index(tail.size())];
  return s;
}

inline Value random_value(Rng& rng) {
  switch (rng.uniform_index(4)) {
    case 0: return rng.bernoulli(0.5);
    case 1: return static_cast<std::int64_t>(rng.uniform_int(-100000, 100000));
    case 2: {
      const double mag = std::pow(10.0, static_cast<double>(rng.uniform_int(-6, 8)));
      return (rng.uniform01() * 2.0 - 1.0) * mag;
    }
    default: {
      static const std::string alphabet =
          "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,.-:/()='\"\\";
      std::string s;
      const auto n = rng.uniform_index(16);
      for (std::uint64_t i = 0; i < n; ++i) s += alphabet[rng.uniform_index(alphabet.size())];
      return s;
    }
  }
}

inline ToolCall random_call(Rng& rng) {
  ToolCall c;
  c.tool_name = random_identifier(rng);
  const auto n = rng.uniform_index(5);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = random_identifier(rng);
    if (c.find(name)) continue;
    c.arguments.push_back({std::move(name), random_value(rng)});
  }
  return c;
}

}  // namespace toolrft::testing
