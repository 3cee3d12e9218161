#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "toolrft/policy/features.hpp"
#include "toolrft/policy/state.hpp"

namespace toolrft {

/// p(a | q, T, s_t) over the legal candidates of a state.
struct StepDistribution {
  std::vector<Step> candidates;
  std::vector<double> probs;
  std::vector<double> log_probs;

  std::optional<std::size_t> index_of(const Step& step) const;
  std::size_t argmax() const;
};

/// Anything that maps a non-terminal state to a distribution over its candidates.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const PolicyConfig& config() const = 0;

  /// Probabilities aligned with candidate_refs(state). Throws on terminal states.
  virtual std::vector<double> candidate_log_probs(const SearchState& state) const = 0;

  StepDistribution step_distribution(const SearchState& state) const;
  double step_log_prob(const SearchState& state, const Step& step) const;
};

struct PolicyParams {
  std::vector<double> weights;

  std::size_t feature_dim() const { return weights.size(); }
  bool operator==(const PolicyParams&) const = default;
};

/// Softmax over theta . phi(state, step).
class LinearPolicy final : public Policy {
 public:
  explicit LinearPolicy(PolicyConfig config = {});
  LinearPolicy(PolicyConfig config, PolicyParams params);

  const PolicyConfig& config() const override { return config_; }
  std::vector<double> candidate_log_probs(const SearchState& state) const override;

  const PolicyParams& params() const { return params_; }
  std::span<double> mutable_weights() { return params_.weights; }
  void set_weights(std::vector<double> weights);

  /// Adds scale * grad_theta log p(step | state) into `grad`; returns log p.
  double accumulate_log_prob_gradient(const SearchState& state, const Step& step, double scale,
                                      std::span<double> grad) const;

  /// log p(step | state), p(step | state) and grad log p in one pass.
  struct StepEval {
    double log_prob = 0;
    std::vector<double> grad_log_prob;
  };
  StepEval evaluate_step(const SearchState& state, const Step& step) const;

 private:
  PolicyConfig config_;
  PolicyParams params_;
};

using ReferencePolicy = std::shared_ptr<const LinearPolicy>;

/// Deep immutable snapshot of the live policy.
ReferencePolicy freeze_reference(const LinearPolicy& policy);

StepDistribution step_distribution(const Policy& policy, const SearchState& state);

/// sum_t log p(y_t | s_t) from the root of `example`. Throws
/// UnreachableStepError when a step is not a legal candidate.
double sequence_logprob(const Policy& policy, const Example& example, std::span<const Step> y);

struct PerplexityOptions {
  /// n counts steps; the terminal step is included unless disabled.
  bool count_terminal = true;
};

/// h = exp(-(1/n) log P(gold | q, T)).
double perplexity(const Policy& policy, const Example& example, PerplexityOptions options = {});

class Confidence {
 public:
  explicit Confidence(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Pluggable self-evaluation C(s_t); an LM judge can implement this.
class SelfEvaluator {
 public:
  virtual ~SelfEvaluator() = default;
  virtual Confidence evaluate(const Policy& policy, const SearchState& state) const = 0;
};

/// Geometric mean of the policy's probabilities along the emitted steps;
/// 1.0 for the empty state.
class LikelihoodEvaluator final : public SelfEvaluator {
 public:
  Confidence evaluate(const Policy& policy, const SearchState& state) const override;
};

Confidence self_eval_confidence(const Policy& policy, const SearchState& state);
Confidence self_eval_confidence(const Policy& policy, const SearchState& state,
                                const SelfEvaluator& evaluator);

inline constexpr int kCheckpointFormatVersion = 1;

void save_policy(const std::filesystem::path& path, const LinearPolicy& policy);
LinearPolicy load_policy(const std::filesystem::path& path, std::size_t candidate_cap = 1024);

}  // namespace toolrft
