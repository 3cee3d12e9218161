#include "toolrft/policy/training.hpp"

#include "toolrft/error.hpp"

namespace toolrft {

double sft_loss(const LinearPolicy& policy, std::span<const Example> batch, std::vector<double>* grad) {
  if (batch.empty()) throw PreconditionError("empty SFT batch");
  const std::size_t dim = policy.params().feature_dim();
  std::vector<double> local(grad ? dim : 0, 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Example& ex : batch) {
    SearchState state = SearchState::root(ex, policy.config());
    for (const Step& step : ex.gold) {
      if (state.is_terminal()) throw UnreachableStepError("gold step after a terminal state in " + ex.id);
      double lp = grad ? policy.accumulate_log_prob_gradient(state, step, -inv, local)
                       : policy.step_log_prob(state, step);
      loss -= lp * inv;
      state = state.extend(step);
    }
  }
  if (grad) *grad = std::move(local);
  return loss;
}

double sft_update(LinearPolicy& policy, std::span<const Example> batch, double learning_rate) {
  if (!(learning_rate >= 0.0)) throw PreconditionError("learning rate must be non-negative");
  std::vector<double> grad;
  const double loss = sft_loss(policy, batch, &grad);
  if (learning_rate > 0.0) {
    auto w = policy.mutable_weights();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * grad[k];
  }
  return loss;
}

}  // namespace toolrft
