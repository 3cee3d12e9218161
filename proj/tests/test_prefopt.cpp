#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "toolrft/buffer/replay_buffer.hpp"
#include "toolrft/error.hpp"
#include "toolrft/policy/training.hpp"
#include "toolrft/prefopt/iteration.hpp"
#include "toolrft/prefopt/losses.hpp"
#include "toolrft/toolspace/corpus.hpp"

using namespace toolrft;
using namespace toolrft::testing;

namespace {

std::vector<Example> corpus(std::uint64_t seed, std::size_t n) {
  CorpusConfig cfg;
  cfg.n_examples = n;
  cfg.seed = seed;
  return generate_corpus(cfg).examples;
}

/// Pairs harvested from short searches over a few examples. Pairs whose two
/// steps share a feature vector are skipped: no linear policy separates them.
std::vector<PreferencePair> harvest(Rng& rng, const std::vector<Example>& data, std::size_t want) {
  std::vector<PreferencePair> out;
  LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  for (int attempt = 0; out.size() < want; ++attempt) {
    REQUIRE(attempt < 1000);
    // Some draws are so peaked that the search never visits two siblings.
    if (attempt % 10 == 9) p = LinearPolicy(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
    SearchConfig cfg;
    cfg.n_simulations = 24;
    cfg.seed = rng.next();
    const SearchTree t = run_search(data[rng.uniform_index(data.size())], p, cfg);
    for (auto& pr : extract_preferences(t, cfg.epsilon_pref)) {
      if (step_features(pr.context, pr.chosen) == step_features(pr.context, pr.rejected)) continue;
      if (out.size() < want) out.push_back(std::move(pr));
    }
  }
  return out;
}

PrefConfig config_for(PrefAlgorithm algo, Rng& rng) {
  PrefConfig c;
  c.algorithm = algo;
  c.beta = 0.05 + 2.0 * rng.uniform01();
  c.simpo_margin = rng.uniform01();
  c.ipo_tau = 0.05 + rng.uniform01();
  c.orpo_lambda = 0.05 + rng.uniform01();
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("algorithm names") {
  for (auto a : {PrefAlgorithm::Dpo, PrefAlgorithm::Simpo, PrefAlgorithm::Ipo, PrefAlgorithm::Orpo}) {
    CHECK(parse_pref_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_pref_algorithm("ppo"), PreconditionError);
  CHECK(parse_reference_mode("warmup") == ReferenceMode::Warmup);
  CHECK_THROWS_AS(parse_reference_mode("best"), PreconditionError);
}

TEST_CASE("scalar losses") {
  PrefConfig c;
  c.beta = 0.1;
  CHECK(std::abs(pair_loss({-1.3, -2.1, -1.3, -2.1}, 1, 1, c).loss - std::log(2.0)) < 1e-12);
  c.beta = 1.0;
  // h_w = 1, h_l = 0
  CHECK(std::abs(pair_loss({-0.5, -2.0, -1.5, -2.0}, 1, 1, c).loss - 0.313262) < 1e-6);
  CHECK(std::abs(pair_loss({-0.5, -2.0, -1.5, -2.0}, 1, 1, c).loss - std::log1p(std::exp(-1.0))) < 1e-12);

  c.algorithm = PrefAlgorithm::Ipo;
  c.ipo_tau = 0.1;
  CHECK(std::abs(pair_loss({-1.0, -1.0, -1.0, -1.0}, 1, 1, c).loss - 25.0) < 1e-12);

  c.algorithm = PrefAlgorithm::Simpo;
  c.beta = 2.0;
  c.simpo_margin = 0.5;
  const double simpo = -std::log(sigmoid(2.0 / 2 * -1.0 - 2.0 / 4 * -3.0 - 0.5));
  CHECK(std::abs(pair_loss({-1.0, -3.0, 0, 0}, 2, 4, c).loss - simpo) < 1e-12);

  c.algorithm = PrefAlgorithm::Orpo;
  c.orpo_lambda = 0.3;
  auto odds = [](double lp) { return lp - std::log1p(-std::exp(lp)); };
  const double orpo = 1.0 - 0.3 * std::log(sigmoid(odds(-1.0) - odds(-2.0)));
  CHECK(std::abs(pair_loss({-1.0, -2.0, 0, 0}, 1, 1, c).loss - orpo) < 1e-12);

  CHECK(step_length(call_step("f", {{"a", true}, {"b", false}})) == 3);
  CHECK(step_length(Step::text("one two three")) == 3);
  CHECK(step_length(Step::terminal()) == 1);
}

TEST_CASE("implicit reward margin") {
  Rng rng(1);
  const auto data = corpus(1, 30);
  const auto pairs = harvest(rng, data, 20);
  LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  LinearPolicy q(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  for (const PreferencePair& pr : pairs) {
    CHECK(implicit_reward_margin(p, *freeze_reference(p), pr, 0.7) == 0.0);
    const double m = implicit_reward_margin(p, q, pr, 0.5);
    CHECK(std::abs(implicit_reward_margin(p, q, pr, 1.0) - 2 * m) < 1e-12);
    const double raw = (p.step_log_prob(pr.context, pr.chosen) - q.step_log_prob(pr.context, pr.chosen)) -
                       (p.step_log_prob(pr.context, pr.rejected) - q.step_log_prob(pr.context, pr.rejected));
    CHECK(std::abs(m - 0.5 * raw) < 1e-12);
  }
}

TEST_CASE("dpo at the reference is ln 2") {
  Rng rng(2);
  const auto pairs = harvest(rng, corpus(2, 30), 10);
  LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  const ReferencePolicy ref = freeze_reference(p);
  PrefConfig c;
  CHECK(std::abs(preference_loss(p, ref.get(), pairs, c).loss - std::log(2.0)) < 1e-12);
}

TEST_CASE("analytic gradients match central differences for every algorithm") {
  Rng rng(3);
  const auto data = corpus(3, 60);
  for (auto algo : {PrefAlgorithm::Dpo, PrefAlgorithm::Simpo, PrefAlgorithm::Ipo, PrefAlgorithm::Orpo}) {
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto pairs = harvest(rng, data, 1 + rng.uniform_index(3));
      const std::vector<double> theta = random_weights(rng, feature_dim(8), 1.0);
      const LinearPolicy ref(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
      const PrefConfig c = config_for(algo, rng);
      const LossAndGradient lg = preference_loss(LinearPolicy(PolicyConfig{}, PolicyParams{theta}), &ref, pairs, c);
      auto f = [&](const std::vector<double>& w) {
        return preference_loss(LinearPolicy(PolicyConfig{}, PolicyParams{w}), &ref, pairs, c).loss;
      };
      worst = std::max(worst, max_fd_error(f, theta, lg.gradient));
    }
    INFO(to_string(algo));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("optimize_batch") {
  Rng rng(4);
  const auto data = corpus(4, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pairs = harvest(rng, data, 1 + rng.uniform_index(4));
    LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
    const ReferencePolicy ref = freeze_reference(p);
    PrefConfig c = config_for(static_cast<PrefAlgorithm>(trial % 4), rng);
    c.learning_rate = 1e-3;
    const OptimizeReport r = optimize_batch(p, ref.get(), pairs, c);
    INFO(to_string(c.algorithm));
    CHECK(r.loss_after < r.loss_before);
  }

  LinearPolicy p(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
  const auto pairs = harvest(rng, data, 3);
  const ReferencePolicy ref = freeze_reference(p);
  PrefConfig zero;
  zero.learning_rate = 0.0;
  const PolicyParams keep = p.params();
  optimize_batch(p, ref.get(), pairs, zero);
  CHECK(p.params() == keep);

  // A single-pair step moves theta along phi_w - phi_l: the in-context odds
  // of chosen over rejected always rise, and with two candidates so does the
  // chosen probability. With more candidates mass can leak to a third step.
  for (int trial = 0; trial < 50; ++trial) {
    const auto one = harvest(rng, data, 1);
    const PreferencePair& pr = one[0];
    LinearPolicy live(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
    const ReferencePolicy r = freeze_reference(live);
    PrefConfig c;
    c.learning_rate = 0.01;
    const double w0 = live.step_log_prob(pr.context, pr.chosen);
    const double l0 = live.step_log_prob(pr.context, pr.rejected);
    optimize_batch(live, r.get(), one, c);
    CHECK(live.step_log_prob(pr.context, pr.chosen) - live.step_log_prob(pr.context, pr.rejected) > w0 - l0);
  }

  const Example binary = make_example("bin", "Please paint_wall with color red.",
                                      {enum_tool("paint_wall", "color", {"red"})},
                                      {call_step("paint_wall", {{"color", std::string("red")}}), Step::terminal()});
  const SearchState root = SearchState::root(binary);
  const auto cands = enumerate_candidates(root);
  REQUIRE(cands.size() == 2);
  for (int trial = 0; trial < 50; ++trial) {
    LinearPolicy live(PolicyConfig{}, PolicyParams{random_weights(rng, feature_dim(8), 1.0)});
    const ReferencePolicy r = freeze_reference(live);
    const std::size_t w = rng.uniform_index(2);
    const std::vector<PreferencePair> one = {PreferencePair{root, cands[w], cands[1 - w], 1.0, 0.0}};
    PrefConfig c = config_for(PrefAlgorithm::Dpo, rng);
    c.learning_rate = 0.01;
    const double before = live.step_log_prob(root, cands[w]);
    optimize_batch(live, r.get(), one, c);
    CHECK(live.step_log_prob(root, cands[w]) >= before);
  }
}

TEST_CASE("loss preconditions") {
  Rng rng(5);
  LinearPolicy p;
  PrefConfig c;
  CHECK_THROWS_AS(preference_loss(p, &p, std::span<const PreferencePair>(), c), PreconditionError);
  const auto pairs = harvest(rng, corpus(5, 20), 2);
  CHECK_THROWS_AS(preference_loss(p, nullptr, pairs, c), PreconditionError);
  c.algorithm = PrefAlgorithm::Ipo;
  CHECK_THROWS_AS(preference_loss(p, nullptr, pairs, c), PreconditionError);
  c.algorithm = PrefAlgorithm::Simpo;
  CHECK_NOTHROW(preference_loss(p, nullptr, pairs, c));
  c.algorithm = PrefAlgorithm::Orpo;
  CHECK_NOTHROW(preference_loss(p, nullptr, pairs, c));
  c.beta = 0.0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("run_iteration") {
  const auto data = corpus(6, 80);
  LinearPolicy base;
  sft_update(base, data, 0.1);

  SearchConfig sc;
  sc.n_simulations = 32;
  sc.c_puct = 4.0;
  PrefConfig pc;
  pc.beta = 1.0;
  pc.learning_rate = 0.1;

  auto one_run = [&](ReferenceMode mode, std::size_t iterations) {
    LinearPolicy policy = base;
    ReplayBuffer buffer = init_buffer(std::span<const Example>(data).subspan(0, 60));
    const ReferencePolicy warm = freeze_reference(policy);
    std::vector<IterationReport> reports;
    for (std::size_t i = 1; i <= iterations; ++i) {
      IterationOptions opt;
      opt.iteration = i;
      opt.reference = mode;
      opt.warmup_reference = warm;
      reports.push_back(run_iteration(policy, buffer, sc, pc, 20, opt).report);
      CHECK(buffer.stale());
    }
    return std::make_pair(policy, reports);
  };

  const auto [pa, ra] = one_run(ReferenceMode::Latest, 3);
  const auto [pb, rb] = one_run(ReferenceMode::Latest, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ra[i].to_json().dump() == rb[i].to_json().dump());
    CHECK(ra[i].sampled_ids.size() == 12);
    if (!ra[i].noop) {
      CHECK(ra[i].initial_margin == 0.0);
      CHECK(std::abs(ra[i].loss_before - std::log(2.0)) < 1e-12);
    }
  }
  CHECK(pa.params() == pb.params());

  const auto [pw, rw] = one_run(ReferenceMode::Warmup, 2);
  if (!rw[0].noop) CHECK(rw[0].initial_margin == 0.0);

  ReplayBuffer buffer = init_buffer(std::span<const Example>(data).subspan(0, 60));
  LinearPolicy policy = base;
  IterationOptions opt;
  opt.reference = ReferenceMode::Warmup;
  CHECK_THROWS_AS(run_iteration(policy, buffer, sc, pc, 20, opt), PreconditionError);
}

TEST_CASE("iteration with no pairs is a no-op") {
  // A single-candidate chain: after the search every node has one child.
  Example ex = make_example("only", "Nothing applies here.", {enum_tool("paint_wall", "color", {"red"})},
                            {Step::refuse(), Step::terminal()});
  LinearPolicy policy;
  ReplayBuffer buffer = init_buffer(std::vector<Example>{ex});
  SearchConfig sc;
  sc.n_simulations = 1;
  const IterationResult r = run_iteration(policy, buffer, sc, PrefConfig{}, 100);
  CHECK(r.report.noop);
  CHECK(r.pairs.empty());
  CHECK(policy.params() == LinearPolicy().params());
}
