#include "toolrft/prefopt/iteration.hpp"

#include <algorithm>

#include "toolrft/error.hpp"

namespace toolrft {

std::string_view to_string(ReferenceMode mode) {
  return mode == ReferenceMode::Latest ? "latest" : "warmup";
}

ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "latest") return ReferenceMode::Latest;
  if (name == "warmup") return ReferenceMode::Warmup;
  throw PreconditionError("unknown reference mode '" + std::string(name) + "'");
}

Json IterationReport::to_json() const {
  Json j;
  j["iteration"] = iteration;
  j["algorithm"] = algorithm;
  j["alpha"] = alpha_percent;
  j["sampled_ids"] = sampled_ids;
  j["mean_complexity"] = mean_complexity;
  j["mean_sampled_complexity"] = mean_sampled_complexity;
  j["tree_nodes"] = tree_nodes;
  j["pairs"] = pairs;
  j["initial_margin"] = initial_margin;
  j["loss_before"] = loss_before;
  j["loss_after"] = loss_after;
  j["epoch_losses"] = epoch_losses;
  j["gradient_steps"] = gradient_steps;
  j["noop"] = noop;
  return j;
}

IterationResult run_iteration(LinearPolicy& policy, ReplayBuffer& buffer,
                              const SearchConfig& search_config, const PrefConfig& pref_config,
                              double alpha_percent, const IterationOptions& options) {
  search_config.validate();
  pref_config.validate();
  if (options.reference == ReferenceMode::Warmup && !options.warmup_reference) {
    throw PreconditionError("warmup reference mode needs the frozen warm-up policy");
  }

  IterationResult result;
  IterationReport& report = result.report;
  report.iteration = options.iteration;
  report.algorithm = std::string(to_string(pref_config.algorithm));
  report.alpha_percent = alpha_percent;

  buffer.refresh(policy, options.iteration, options.perplexity);
  for (const ReplayEntry& e : buffer.entries()) report.mean_complexity += *e.complexity;
  report.mean_complexity /= static_cast<double>(buffer.size());

  const std::vector<Example> hard = buffer.sample_hard(alpha_percent);
  for (const ReplayEntry& e : buffer.entries()) {
    const bool sampled = std::any_of(hard.begin(), hard.end(),
                                     [&](const Example& h) { return h.id == e.example.id; });
    if (sampled) report.mean_sampled_complexity += *e.complexity;
  }
  report.mean_sampled_complexity /= static_cast<double>(hard.size());

  for (std::size_t i = 0; i < hard.size(); ++i) {
    report.sampled_ids.push_back(hard[i].id);
    SearchConfig cfg = search_config;
    cfg.seed = derive_seed(derive_seed(search_config.seed, options.iteration), i);
    SearchTree tree = run_search(hard[i], policy, cfg);
    report.tree_nodes += tree.size();
    std::vector<PreferencePair> pairs = extract_preferences(tree, search_config.epsilon_pref);
    result.pairs.insert(result.pairs.end(), pairs.begin(), pairs.end());
    if (options.keep_trees) result.trees.push_back(std::move(tree));
  }
  report.pairs = result.pairs.size();
  buffer.mark_stale();
  if (result.pairs.empty()) {
    report.noop = true;
    return result;
  }

  const ReferencePolicy ref =
      options.reference == ReferenceMode::Latest ? freeze_reference(policy) : options.warmup_reference;
  const Policy* ref_ptr = ref.get();

  for (const PreferencePair& p : result.pairs) {
    report.initial_margin += implicit_reward_margin(policy, *ref_ptr, p, pref_config.beta);
  }
  report.initial_margin /= static_cast<double>(result.pairs.size());
  report.loss_before = preference_loss(policy, ref_ptr, result.pairs, pref_config).loss;

  const std::size_t n = result.pairs.size();
  const std::size_t bs = pref_config.batch_size == 0 ? n : std::min(pref_config.batch_size, n);
  std::span<const PreferencePair> all(result.pairs);
  for (std::size_t epoch = 0; epoch < pref_config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      LossAndGradient lg = preference_loss(policy, ref_ptr, all.subspan(start, len), pref_config);
      std::span<double> w = policy.mutable_weights();
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= pref_config.learning_rate * lg.gradient[k];
      epoch_loss += lg.loss;
      ++batches;
      ++report.gradient_steps;
    }
    report.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  report.loss_after = preference_loss(policy, ref_ptr, result.pairs, pref_config).loss;
  return result;
}

}  // namespace toolrft
