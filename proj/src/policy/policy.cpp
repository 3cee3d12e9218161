#include "toolrft/policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "toolrft/error.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {
namespace {

std::size_t find_candidate(std::span<const Step* const> refs, const Step& step) {
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i] == &step) return i;
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (*refs[i] == step) return i;
  }
  throw UnreachableStepError("step is not among the legal candidates at this state");
}

void log_softmax_inplace(std::vector<double>& logits) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - hi);
  const double lse = hi + std::log(sum);
  for (double& z : logits) z -= lse;
}

}  // namespace

std::optional<std::size_t> StepDistribution::index_of(const Step& step) const {
  auto it = std::find(candidates.begin(), candidates.end(), step);
  if (it == candidates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - candidates.begin());
}

std::size_t StepDistribution::argmax() const {
  // First maximum wins, so ties follow candidate order.
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

StepDistribution Policy::step_distribution(const SearchState& state) const {
  auto refs = candidate_refs(state);
  StepDistribution d;
  d.log_probs = candidate_log_probs(state);
  d.candidates.reserve(refs.size());
  for (const Step* s : refs) d.candidates.push_back(*s);
  d.probs.reserve(d.log_probs.size());
  for (double lp : d.log_probs) d.probs.push_back(std::exp(lp));
  return d;
}

double Policy::step_log_prob(const SearchState& state, const Step& step) const {
  auto refs = candidate_refs(state);
  std::size_t idx = find_candidate(refs, step);
  return candidate_log_probs(state)[idx];
}

LinearPolicy::LinearPolicy(PolicyConfig config)
    : config_(config), params_{std::vector<double>(feature_dim(config.max_depth), 0.0)} {}

LinearPolicy::LinearPolicy(PolicyConfig config, PolicyParams params)
    : config_(config), params_(std::move(params)) {
  if (params_.weights.size() != feature_dim(config_.max_depth)) {
    throw PreconditionError("weight vector does not match the feature dimension");
  }
  for (double w : params_.weights) {
    if (!std::isfinite(w)) throw PreconditionError("non-finite policy weight");
  }
}

void LinearPolicy::set_weights(std::vector<double> weights) {
  *this = LinearPolicy(config_, PolicyParams{std::move(weights)});
}

std::vector<double> LinearPolicy::candidate_log_probs(const SearchState& state) const {
  auto refs = candidate_refs(state);
  FeatureMatrix phi = featurize(state, refs);
  if (phi.cols != params_.weights.size()) {
    throw PreconditionError("state feature dimension does not match the policy");
  }
  std::vector<double> logits(phi.rows, 0.0);
  for (std::size_t i = 0; i < phi.rows; ++i) {
    auto row = phi.row(i);
    double z = 0.0;
    for (std::size_t k = 0; k < phi.cols; ++k) z += params_.weights[k] * row[k];
    logits[i] = z;
  }
  log_softmax_inplace(logits);
  return logits;
}

double LinearPolicy::accumulate_log_prob_gradient(const SearchState& state, const Step& step,
                                                  double scale, std::span<double> grad) const {
  auto refs = candidate_refs(state);
  std::size_t idx = find_candidate(refs, step);
  FeatureMatrix phi = featurize(state, refs);
  if (phi.cols != params_.weights.size()) {
    throw PreconditionError("state feature dimension does not match the policy");
  }
  std::vector<double> logp(phi.rows, 0.0);
  for (std::size_t i = 0; i < phi.rows; ++i) {
    auto row = phi.row(i);
    double z = 0.0;
    for (std::size_t k = 0; k < phi.cols; ++k) z += params_.weights[k] * row[k];
    logp[i] = z;
  }
  log_softmax_inplace(logp);
  // grad log p_a = phi_a - E_p[phi]
  auto chosen = phi.row(idx);
  for (std::size_t k = 0; k < phi.cols; ++k) grad[k] += scale * chosen[k];
  for (std::size_t i = 0; i < phi.rows; ++i) {
    const double w = scale * std::exp(logp[i]);
    if (w == 0.0) continue;
    auto row = phi.row(i);
    for (std::size_t k = 0; k < phi.cols; ++k) grad[k] -= w * row[k];
  }
  return logp[idx];
}

LinearPolicy::StepEval LinearPolicy::evaluate_step(const SearchState& state, const Step& step) const {
  StepEval e;
  e.grad_log_prob.assign(params_.weights.size(), 0.0);
  e.log_prob = accumulate_log_prob_gradient(state, step, 1.0, e.grad_log_prob);
  return e;
}

ReferencePolicy freeze_reference(const LinearPolicy& policy) {
  return std::make_shared<const LinearPolicy>(policy);
}

StepDistribution step_distribution(const Policy& policy, const SearchState& state) {
  return policy.step_distribution(state);
}

double sequence_logprob(const Policy& policy, const Example& example, std::span<const Step> y) {
  SearchState state = SearchState::root(example, policy.config());
  double total = 0.0;
  for (const Step& step : y) {
    if (state.is_terminal()) throw UnreachableStepError("step after a terminal state");
    total += policy.step_log_prob(state, step);
    state = state.extend(step);
  }
  return total;
}

double perplexity(const Policy& policy, const Example& example, PerplexityOptions options) {
  const double logp = sequence_logprob(policy, example, example.gold);
  std::size_t n = example.gold.size();
  if (!options.count_terminal && n > 0 && example.gold.back().is_terminal()) --n;
  if (n == 0) return 1.0;
  return std::exp(-logp / static_cast<double>(n));
}

Confidence::Confidence(double value) {
  if (!(value >= -1e-12 && value <= 1.0 + 1e-12)) {
    throw PreconditionError("confidence outside [0,1]");
  }
  value_ = std::clamp(value, 0.0, 1.0);
}

Confidence LikelihoodEvaluator::evaluate(const Policy& policy, const SearchState& state) const {
  if (state.depth() == 0) return Confidence(1.0);
  SearchState cursor = SearchState::root(state.context_ptr());
  double total = 0.0;
  for (const Step& step : state.steps()) {
    total += policy.step_log_prob(cursor, step);
    cursor = cursor.extend(step);
  }
  return Confidence(std::exp(total / static_cast<double>(state.depth())));
}

Confidence self_eval_confidence(const Policy& policy, const SearchState& state) {
  static const LikelihoodEvaluator evaluator;
  return evaluator.evaluate(policy, state);
}

Confidence self_eval_confidence(const Policy& policy, const SearchState& state,
                                const SelfEvaluator& evaluator) {
  return evaluator.evaluate(policy, state);
}

void save_policy(const std::filesystem::path& path, const LinearPolicy& policy) {
  Json j;
  j["feature_dim"] = policy.params().feature_dim();
  j["weights"] = policy.params().weights;
  j["format_version"] = kCheckpointFormatVersion;
  write_json_file(path, j);
}

LinearPolicy load_policy(const std::filesystem::path& path, std::size_t candidate_cap) {
  Json j = read_json_file(path);
  if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
    throw PreconditionError("unsupported checkpoint format_version");
  }
  const auto dim = j.at("feature_dim").get<std::size_t>();
  auto weights = j.at("weights").get<std::vector<double>>();
  if (weights.size() != dim) throw PreconditionError("checkpoint weights do not match feature_dim");
  PolicyConfig config;
  config.max_depth = max_depth_for_dim(dim);
  config.candidate_cap = candidate_cap;
  return LinearPolicy(config, PolicyParams{std::move(weights)});
}

}  // namespace toolrft
