// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
// usage: acceptance <path-to-toolrft-cli> <path-to-config.json>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "toolrft/buffer/replay_buffer.hpp"
#include "toolrft/pipeline/pipeline.hpp"
#include "toolrft/policy/training.hpp"
#include "toolrft/prefopt/losses.hpp"
#include "toolrft/toolspace/call_syntax.hpp"

using namespace toolrft;
using namespace toolrft::testing;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kLn2Tol = 1e-12;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kBackupTol = 1e-12;
constexpr double kPerplexityTol = 1e-9;
constexpr double kRuntime1 = 1.0;
constexpr double kRuntime2 = 30.0;
constexpr double kRuntime3 = 60.0;
constexpr double kRuntime8 = 180.0;
constexpr double kRuntime9 = 300.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && dt >= budget_s) {
    o.pass = false;
    o.detail += " [over runtime budget]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), dt, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<Example> corpus(std::uint64_t seed, std::size_t n) {
  CorpusConfig cfg;
  cfg.n_examples = n;
  cfg.seed = seed;
  return generate_corpus(cfg).examples;
}

std::vector<PreferencePair> harvest(Rng& rng, const std::vector<Example>& data, std::size_t want) {
  std::vector<PreferencePair> out;
  LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  for (int attempt = 0; out.size() < want; ++attempt) {
    if (attempt % 10 == 9) p = LinearPolicy(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
    SearchConfig cfg;
    cfg.n_simulations = 24;
    cfg.seed = rng.next();
    for (auto& pr : extract_preferences(run_search(data[rng.uniform_index(data.size())], p, cfg), 1e-6)) {
      if (out.size() < want) out.push_back(std::move(pr));
    }
  }
  return out;
}

/// The iteration preset used for the desk-scale analogs.
RunConfig desk_config(std::uint64_t seed) {
  RunConfig c;
  c.with_seed(seed);
  c.warmup.learning_rate = 0.1;
  c.search.c_puct = 4.0;
  c.search.n_simulations = 64;
  c.pref.algorithm = PrefAlgorithm::Dpo;
  c.pref.beta = 1.0;
  c.pref.learning_rate = 0.1;
  c.pref.epochs = 3;
  c.pref.batch_size = 1;
  c.iterations = 3;
  c.alpha_percent = 20;
  return c;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(entry.path(), root).string()] = ss.str();
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "toolrft";
  const std::string config_path = argc > 2 ? argv[2] : "";

  report(1, "dpo identity", kRuntime1, [] {
    Rng rng(1);
    const auto pairs = harvest(rng, corpus(1, 40), 50);
    double worst_loss = 0;
    double worst_margin = 0;
    for (int t = 0; t < 20; ++t) {
      LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
      const ReferencePolicy ref = freeze_reference(p);
      PrefConfig c;
      c.beta = 0.05 + rng.uniform01() * 2;
      worst_loss = std::max(worst_loss, std::abs(preference_loss(p, ref.get(), pairs, c).loss - std::log(2.0)));
      for (const auto& pr : pairs) worst_margin = std::max(worst_margin, std::abs(implicit_reward_margin(p, *ref, pr, c.beta)));
    }
    return Outcome{worst_loss <= kLn2Tol && worst_margin == 0.0,
                   fmt("max |loss - ln2| = %.2e", worst_loss) + fmt(", max |margin| = %.1e", worst_margin)};
  });

  report(2, "gradient correctness", kRuntime2, [] {
    Rng rng(2);
    const auto data = corpus(2, 80);
    std::map<std::string, double> worst;
    for (int t = 0; t < 100; ++t) {
      std::vector<Example> batch;
      for (int i = 0; i < 3; ++i) batch.push_back(data[rng.uniform_index(data.size())]);
      const auto theta = random_weights(rng, feature_dim(8), 1.0);
      std::vector<double> grad;
      sft_loss(LinearPolicy(PolicyConfig{}, PolicyParams{theta}), batch, &grad);
      auto f = [&](const std::vector<double>& w) { return sft_loss(LinearPolicy(PolicyConfig{}, PolicyParams{w}), batch); };
      worst["sft"] = std::max(worst["sft"], max_fd_error(f, theta, grad, kFdStep));
    }
    for (auto algo : {PrefAlgorithm::Dpo, PrefAlgorithm::Simpo, PrefAlgorithm::Ipo, PrefAlgorithm::Orpo}) {
      const std::string name(to_string(algo));
      for (int t = 0; t < 100; ++t) {
        const auto pairs = harvest(rng, data, 1 + rng.uniform_index(3));
        const auto theta = random_weights(rng, feature_dim(8), 1.0);
        const LinearPolicy ref(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
        PrefConfig c;
        c.algorithm = algo;
        c.beta = 0.05 + 2.0 * rng.uniform01();
        c.simpo_margin = rng.uniform01();
        c.ipo_tau = 0.05 + rng.uniform01();
        c.orpo_lambda = 0.05 + rng.uniform01();
        const auto lg = preference_loss(LinearPolicy(PolicyConfig{}, PolicyParams{theta}), &ref, pairs, c);
        auto f = [&](const std::vector<double>& w) {
          return preference_loss(LinearPolicy(PolicyConfig{}, PolicyParams{w}), &ref, pairs, c).loss;
        };
        worst[name] = std::max(worst[name], max_fd_error(f, theta, lg.gradient, kFdStep));
      }
    }
    bool ok = true;
    std::string detail = "max rel err:";
    for (const auto& [k, v] : worst) {
      ok &= v < kFdRelTol;
      detail += " " + k + fmt("=%.1e", v);
    }
    return Outcome{ok, detail};
  });

  report(3, "mcts optimality oracle", kRuntime3, [] {
    int envs = 0;
    int matched = 0;
    double worst = 0;
    for (std::uint64_t seed = 0; envs < 20 && seed < 500; ++seed) {
      auto env = micro_env(seed);
      if (!env) continue;
      ++envs;
      const SearchState root = SearchState::root(env->example, env->policy.config());
      const auto cands = enumerate_candidates(root);
      std::vector<double> best;
      for (const Step& c : cands) best.push_back(best_terminal_reward(root.extend(c), env->example, env->policy));
      const double top = *std::max_element(best.begin(), best.end());
      const SearchTree tree = run_search(env->example, env->policy, env->search, nullptr,
                                         [&](const SearchTree& t, std::size_t) { worst = std::max(worst, backup_identity_error(t)); });
      const auto& kids = tree.node(0).children;
      std::size_t arg = 0;
      for (std::size_t i = 1; i < kids.size(); ++i) {
        if (kids[i].q > kids[arg].q) arg = i;
      }
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (cands[i] == kids[arg].step && best[i] >= top - 1e-12) ++matched;
      }
    }
    return Outcome{envs == 20 && matched == 20 && worst <= kBackupTol,
                   std::to_string(matched) + "/" + std::to_string(envs) + " optimal root steps" +
                       fmt(", max backup identity error %.1e", worst)};
  });

  report(4, "puct arithmetic", 0, [] {
    const double s0 = puct_score(0.5, 0.3, 4, 1, 1.0);
    const double s1 = puct_score(0.2, 0.7, 4, 0, 1.0);
    bool ok = s0 == 0.5 + 0.3 * 2.0 / 2.0 && s1 == 0.2 + 0.7 * 2.0 / 1.0;
    ok &= std::abs(s0 - 0.8) < 1e-15 && std::abs(s1 - 1.6) < 1e-15;
    // c = 0 reduces selection to argmax-Q over random trees.
    Rng rng(4);
    const Example ex = paint_example();
    int agree = 0;
    for (int t = 0; t < 50; ++t) {
      const SearchState root = SearchState::root(ex);
      const auto cands = enumerate_candidates(root);
      SearchTree tree(SearchNode(root, std::nullopt), ex.id);
      std::size_t total = 0;
      for (const Step& c : cands) {
        SearchNode child(root.extend(c), SearchTree::kRoot);
        child.visits = rng.uniform_index(6);
        total += child.visits;
        const std::size_t id = tree.add_node(std::move(child));
        tree.node(0).children.push_back(SearchEdge{c, rng.uniform01(), 0.0, rng.uniform01() * 2 - 1, id});
      }
      tree.node(0).visits = total;
      std::size_t best = 0;
      const auto& kids = tree.node(0).children;
      for (std::size_t i = 1; i < kids.size(); ++i) {
        if (kids[i].q > kids[best].q) best = i;
      }
      SearchConfig cfg;
      cfg.c_puct = 0.0;
      agree += select_child(tree, 0, cfg) == best;
    }
    return Outcome{ok && agree == 50, fmt("scores [%.17g, ", s0) + fmt("%.17g]", s1) +
                                          ", argmax-Q on " + std::to_string(agree) + "/50 trees"};
  });

  report(5, "perplexity", 0, [] {
    const std::vector<std::string> colours = {"red", "green", "blue", "amber", "cyan"};
    double worst_uniform = 0;
    for (std::size_t values = 1; values <= 5; ++values) {
      // With v enum values every state offers v calls plus one of refuse /
      // terminal, so k = v + 1.
      for (std::size_t n = 1; n <= 7; ++n) {
        Example ex = make_example("u", "Please paint_wall with color red.",
                                  {enum_tool("paint_wall", "color", std::vector<std::string>(colours.begin(), colours.begin() + values))},
                                  {});
        ex.gold.assign(n, call_step("paint_wall", {{"color", std::string("red")}}));
        ex.gold.push_back(Step::terminal());
        const double h = perplexity(UniformPolicy(), ex);
        worst_uniform = std::max(worst_uniform, std::abs(h - static_cast<double>(values + 1)));
      }
    }
    Rng rng(5);
    const auto data = corpus(5, 200);
    double min_h = 1e300;
    double worst_oracle = 0;
    for (int i = 0; i < 1000; ++i) {
      const Example& e = data[rng.uniform_index(data.size())];
      const LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 2.0)});
      const double h = perplexity(p, e);
      min_h = std::min(min_h, h);
      double prob = 1.0;
      SearchState s = SearchState::root(e);
      for (const Step& step : e.gold) {
        const StepDistribution d = p.step_distribution(s);
        prob *= d.probs[*d.index_of(step)];
        s = s.extend(step);
      }
      worst_oracle = std::max(worst_oracle, relative_error(h, std::pow(1.0 / prob, 1.0 / e.gold.size())));
    }
    return Outcome{worst_uniform < 1e-12 && min_h >= 1.0 && worst_oracle < kPerplexityTol,
                   fmt("uniform max |h-k| %.1e", worst_uniform) + fmt(", min h %.4f", min_h) +
                       fmt(", oracle rel err %.1e", worst_oracle)};
  });

  report(6, "buffer sampling", 0, [] {
    Rng rng(6);
    CorpusConfig cc;
    cc.n_examples = 60;
    cc.seed = 6;
    ReplayBuffer buffer = init_buffer(generate_corpus(cc).examples);
    buffer.refresh(LinearPolicy(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)}), 1);
    const auto hard = buffer.sample_hard(20);
    std::set<std::string> in;
    for (const auto& e : hard) in.insert(e.id);
    double min_in = 1e300, max_out = -1e300;
    for (const auto& e : buffer.entries()) {
      (in.count(e.example.id) ? min_in : max_out) =
          in.count(e.example.id) ? std::min(min_in, *e.complexity) : std::max(max_out, *e.complexity);
    }
    std::string grid;
    bool grid_ok = true;
    const std::map<int, std::size_t> expected = {{10, 6}, {15, 9}, {20, 12}, {25, 15}, {30, 18}};
    for (const auto& [alpha, n] : expected) {
      grid_ok &= buffer.sample_hard(alpha).size() == n;
      grid += " " + std::to_string(alpha) + "->" + std::to_string(n);
    }
    return Outcome{hard.size() == 12 && min_in >= max_out && grid_ok,
                   std::to_string(hard.size()) + " sampled" + fmt(", min in %.4f", min_in) +
                       fmt(" >= max out %.4f; alpha grid", max_out) + grid};
  });

  report(7, "preference-pair soundness", 0, [] {
    Rng rng(7);
    const auto data = corpus(7, 100);
    std::size_t pairs = 0;
    std::size_t bad = 0;
    for (int t = 0; t < 100; ++t) {
      LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
      SearchConfig cfg;
      cfg.n_simulations = 48;
      cfg.seed = static_cast<std::uint64_t>(t);
      const SearchTree tree = run_search(data[t], p, cfg);
      for (const PreferencePair& pr : extract_preferences(tree, cfg.epsilon_pref)) {
        ++pairs;
        bool shared = false;
        for (const SearchNode& n : tree.nodes()) {
          if (!(n.state == pr.context)) continue;
          bool w = false, l = false;
          for (const SearchEdge& e : n.children) {
            w |= e.step == pr.chosen && tree.node(e.child).state == pr.context.extend(pr.chosen);
            l |= e.step == pr.rejected && tree.node(e.child).state == pr.context.extend(pr.rejected);
          }
          shared |= w && l;
        }
        if (!(pr.q_chosen - pr.q_rejected >= cfg.epsilon_pref) || !shared) ++bad;
      }
    }
    return Outcome{pairs > 0 && bad == 0, std::to_string(pairs) + " pairs, " + std::to_string(bad) + " violations"};
  });

  report(8, "curriculum vs mixed warm-up", kRuntime8, [] {
    const int seeds = 20;
    double sum = 0;
    int wins = 0, ties = 0;
    for (int s = 0; s < seeds; ++s) {
      const RunConfig c = desk_config(static_cast<std::uint64_t>(s));
      const Corpus corpus = generate_corpus(c.corpus);
      const auto eval = generate_eval_set(c);
      const DatasetSplit split = split_warmup_rl(corpus.examples, c.warmup_fraction, c.split_seed);
      LinearPolicy curriculum(c.policy), mixed(c.policy);
      WarmupConfig wc = c.warmup;
      const auto rc = run_warmup(curriculum, split.warmup, wc);
      wc.order = WarmupOrder::Mixed;
      const auto rm = run_warmup(mixed, split.warmup, wc);
      if (rc.total_steps() != rm.total_steps()) return Outcome{false, "gradient-step budgets differ"};
      const double d = evaluate(curriculum, eval).accuracy_hard - evaluate(mixed, eval).accuracy_hard;
      sum += d;
      wins += d > 0;
      ties += d == 0;
    }
    const double mean = sum / seeds;
    return Outcome{mean >= 0.0, fmt("mean paired hard-bucket diff %+.4f", mean) + " over " + std::to_string(seeds) +
                                    " seeds (" + std::to_string(wins) + " wins, " + std::to_string(ties) + " ties)"};
  });

  report(9, "iterations improve hard bucket", kRuntime9, [] {
    const int seeds = 10;
    double gain = 0, late = 0;
    for (int s = 0; s < seeds; ++s) {
      const RunResult r = run_pipeline(desk_config(static_cast<std::uint64_t>(s)));
      gain += r.iterations.at(2).eval.accuracy_hard - r.warmup_eval.accuracy_hard;
      late += r.iterations.at(2).eval.accuracy_hard - r.iterations.at(0).eval.accuracy_hard;
    }
    gain /= seeds;
    late /= seeds;
    return Outcome{gain > 0.0 && late >= 0.0, fmt("mean hard delta vs warm-up %+.4f", gain) +
                                                  fmt(", it3 - it1 %+.4f", late) + " over " + std::to_string(seeds) + " seeds"};
  });

  report(10, "determinism", 0, [&] {
    const fs::path base = fs::temp_directory_path() / "toolrft_acceptance_determinism";
    fs::remove_all(base);
    std::map<std::string, std::string> runs[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path dir = base / ("run" + std::to_string(i));
      std::string cmd = "\"" + cli + "\"";
      if (!config_path.empty()) cmd += " --config \"" + config_path + "\"";
      cmd += " --seed 0 --out-dir \"" + dir.string() + "\" run --dump-tree > /dev/null";
      if (std::system(cmd.c_str()) != 0) return Outcome{false, "cli run failed: " + cmd};
      runs[i] = tree_bytes(dir);
    }
    fs::remove_all(base);
    std::size_t differing = 0;
    for (const auto& [name, bytes] : runs[0]) {
      auto it = runs[1].find(name);
      differing += it == runs[1].end() || it->second != bytes;
    }
    const bool have = runs[0].count("report.json") && runs[0].count("policy.json");
    return Outcome{have && differing == 0 && runs[0].size() == runs[1].size(),
                   std::to_string(runs[0].size()) + " files compared, " + std::to_string(differing) + " differ"};
  });

  report(11, "parser", 0, [] {
    const ToolCall c = parse_tool_call("get_weather(location=“San Francisco”, date=“2025-05-01”)");
    const ToolCall want{"get_weather", {{"location", std::string("San Francisco")}, {"date", std::string("2025-05-01")}}};
    Rng rng(11);
    int round_trips = 0;
    for (int i = 0; i < 1000; ++i) {
      const ToolCall r = random_call(rng);
      round_trips += parse_tool_call(render_tool_call(r)) == r;
    }
    return Outcome{c == want && round_trips == 1000,
                   std::string("fixture ") + (c == want ? "ok" : "mismatch") + ", " + std::to_string(round_trips) +
                       "/1000 round trips"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
