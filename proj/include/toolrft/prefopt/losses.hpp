#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/search/mcts.hpp"

namespace toolrft {

enum class PrefAlgorithm { Dpo, Simpo, Ipo, Orpo };

std::string_view to_string(PrefAlgorithm algorithm);
PrefAlgorithm parse_pref_algorithm(std::string_view name);

struct PrefConfig {
  PrefAlgorithm algorithm = PrefAlgorithm::Dpo;
  double beta = 0.1;
  double learning_rate = 1e-3;
  std::size_t epochs = 1;
  /// Pairs per gradient step; 0 means the whole pooled batch.
  std::size_t batch_size = 1;
  double simpo_margin = 0.5;
  double ipo_tau = 0.1;
  double orpo_lambda = 0.1;

  void validate() const;
  /// True for the algorithms whose loss depends on a reference policy.
  bool needs_reference() const;
};

struct PrefBatch {
  std::vector<PreferencePair> pairs;
  std::size_t iteration = 0;
};

/// Length |y| of a single step, used by SimPO's length normalisation:
/// 1 + argument count for calls, word count for text, 1 otherwise.
std::size_t step_length(const Step& step);

/// The four log-probabilities a pair's loss depends on.
struct PairLogProbs {
  double policy_chosen = 0;
  double policy_rejected = 0;
  double ref_chosen = 0;
  double ref_rejected = 0;
};

/// Per-pair loss and its derivatives with respect to the policy's chosen and
/// rejected log-probabilities.
struct PairLoss {
  double loss = 0;
  double d_chosen = 0;
  double d_rejected = 0;
};

PairLoss pair_loss(const PairLogProbs& lp, std::size_t len_chosen, std::size_t len_rejected,
                   const PrefConfig& config);

/// beta * (h_w - h_l) with h = log(pi / pi_ref) of the step in the pair's context.
double implicit_reward_margin(const Policy& policy, const Policy& ref, const PreferencePair& pair,
                              double beta);

struct LossAndGradient {
  double loss = 0;
  std::vector<double> gradient;
};

/// Mean per-pair loss over `pairs` and its analytic gradient with respect to
/// the policy weights. `ref` may be null for simpo / orpo.
LossAndGradient preference_loss(const LinearPolicy& policy, const Policy* ref,
                                std::span<const PreferencePair> pairs, const PrefConfig& config);
LossAndGradient preference_loss(const LinearPolicy& policy, const Policy* ref,
                                const PrefBatch& batch, const PrefConfig& config);

struct OptimizeReport {
  double loss_before = 0;
  double loss_after = 0;
  double gradient_norm = 0;
};

/// One gradient step on the batch's preference loss.
OptimizeReport optimize_batch(LinearPolicy& policy, const Policy* ref,
                              std::span<const PreferencePair> pairs, const PrefConfig& config);

}  // namespace toolrft
