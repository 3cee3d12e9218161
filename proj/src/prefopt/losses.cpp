#include "toolrft/prefopt/losses.hpp"

#include <algorithm>
#include <cmath>

#include "toolrft/error.hpp"
#include "toolrft/policy/state.hpp"

namespace toolrft {
namespace {

// log sigma(x) and sigma(x) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(P / (1 - P)) for P = exp(lp), and its derivative in lp. P is kept
// below 1 so a single-candidate step stays finite.
constexpr double kMaxLogProb = -1e-12;
double log_odds(double lp) {
  lp = std::min(lp, kMaxLogProb);
  return lp - std::log(-std::expm1(lp));
}
double d_log_odds(double lp) { return 1.0 / (-std::expm1(std::min(lp, kMaxLogProb))); }

}  // namespace

std::string_view to_string(PrefAlgorithm algorithm) {
  switch (algorithm) {
    case PrefAlgorithm::Dpo: return "dpo";
    case PrefAlgorithm::Simpo: return "simpo";
    case PrefAlgorithm::Ipo: return "ipo";
    case PrefAlgorithm::Orpo: return "orpo";
  }
  return "dpo";
}

PrefAlgorithm parse_pref_algorithm(std::string_view name) {
  if (name == "dpo") return PrefAlgorithm::Dpo;
  if (name == "simpo") return PrefAlgorithm::Simpo;
  if (name == "ipo") return PrefAlgorithm::Ipo;
  if (name == "orpo") return PrefAlgorithm::Orpo;
  throw PreconditionError("unknown preference algorithm '" + std::string(name) + "'");
}

void PrefConfig::validate() const {
  if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
  if (!(learning_rate >= 0.0)) throw PreconditionError("learning rate must be non-negative");
  if (!(simpo_margin >= 0.0)) throw PreconditionError("simpo margin must be non-negative");
  if (!(ipo_tau > 0.0)) throw PreconditionError("ipo tau must be positive");
  if (!(orpo_lambda > 0.0)) throw PreconditionError("orpo lambda must be positive");
}

bool PrefConfig::needs_reference() const {
  return algorithm == PrefAlgorithm::Dpo || algorithm == PrefAlgorithm::Ipo;
}

std::size_t step_length(const Step& step) {
  switch (step.kind()) {
    case Step::Kind::Call: return 1 + step.as_call().arguments.size();
    case Step::Kind::Text: return std::max<std::size_t>(1, word_tokens(step.as_text()).size());
    default: return 1;
  }
}

PairLoss pair_loss(const PairLogProbs& lp, std::size_t len_chosen, std::size_t len_rejected,
                   const PrefConfig& config) {
  PairLoss out;
  switch (config.algorithm) {
    case PrefAlgorithm::Dpo: {
      const double m = config.beta * ((lp.policy_chosen - lp.ref_chosen) -
                                      (lp.policy_rejected - lp.ref_rejected));
      out.loss = -log_sigmoid(m);
      const double g = -sigmoid(-m) * config.beta;
      out.d_chosen = g;
      out.d_rejected = -g;
      break;
    }
    case PrefAlgorithm::Simpo: {
      const double bw = config.beta / static_cast<double>(len_chosen);
      const double bl = config.beta / static_cast<double>(len_rejected);
      const double m = bw * lp.policy_chosen - bl * lp.policy_rejected - config.simpo_margin;
      out.loss = -log_sigmoid(m);
      const double s = -sigmoid(-m);
      out.d_chosen = s * bw;
      out.d_rejected = -s * bl;
      break;
    }
    case PrefAlgorithm::Ipo: {
      const double h = (lp.policy_chosen - lp.ref_chosen) - (lp.policy_rejected - lp.ref_rejected);
      const double d = h - 1.0 / (2.0 * config.ipo_tau);
      out.loss = d * d;
      out.d_chosen = 2.0 * d;
      out.d_rejected = -2.0 * d;
      break;
    }
    case PrefAlgorithm::Orpo: {
      const double m = log_odds(lp.policy_chosen) - log_odds(lp.policy_rejected);
      out.loss = -lp.policy_chosen - config.orpo_lambda * log_sigmoid(m);
      const double s = -config.orpo_lambda * sigmoid(-m);
      out.d_chosen = -1.0 + s * d_log_odds(lp.policy_chosen);
      out.d_rejected = -s * d_log_odds(lp.policy_rejected);
      break;
    }
  }
  return out;
}

double implicit_reward_margin(const Policy& policy, const Policy& ref, const PreferencePair& pair,
                              double beta) {
  const double hw =
      policy.step_log_prob(pair.context, pair.chosen) - ref.step_log_prob(pair.context, pair.chosen);
  const double hl = policy.step_log_prob(pair.context, pair.rejected) -
                    ref.step_log_prob(pair.context, pair.rejected);
  return beta * (hw - hl);
}

LossAndGradient preference_loss(const LinearPolicy& policy, const Policy* ref,
                                std::span<const PreferencePair> pairs, const PrefConfig& config) {
  config.validate();
  if (pairs.empty()) throw PreconditionError("preference batch is empty");
  if (config.needs_reference() && ref == nullptr) {
    throw PreconditionError(std::string(to_string(config.algorithm)) + " requires a reference policy");
  }
  LossAndGradient out;
  out.gradient.assign(policy.params().feature_dim(), 0.0);
  const double inv = 1.0 / static_cast<double>(pairs.size());
  for (const PreferencePair& pair : pairs) {
    const LinearPolicy::StepEval w = policy.evaluate_step(pair.context, pair.chosen);
    const LinearPolicy::StepEval l = policy.evaluate_step(pair.context, pair.rejected);
    PairLogProbs lp{w.log_prob, l.log_prob, 0.0, 0.0};
    if (config.needs_reference()) {
      lp.ref_chosen = ref->step_log_prob(pair.context, pair.chosen);
      lp.ref_rejected = ref->step_log_prob(pair.context, pair.rejected);
    }
    const PairLoss pl = pair_loss(lp, step_length(pair.chosen), step_length(pair.rejected), config);
    out.loss += inv * pl.loss;
    for (std::size_t k = 0; k < out.gradient.size(); ++k) {
      out.gradient[k] += inv * (pl.d_chosen * w.grad_log_prob[k] + pl.d_rejected * l.grad_log_prob[k]);
    }
  }
  return out;
}

LossAndGradient preference_loss(const LinearPolicy& policy, const Policy* ref,
                                const PrefBatch& batch, const PrefConfig& config) {
  return preference_loss(policy, ref, batch.pairs, config);
}

OptimizeReport optimize_batch(LinearPolicy& policy, const Policy* ref,
                              std::span<const PreferencePair> pairs, const PrefConfig& config) {
  LossAndGradient lg = preference_loss(policy, ref, pairs, config);
  OptimizeReport report;
  report.loss_before = lg.loss;
  double sq = 0.0;
  for (double g : lg.gradient) sq += g * g;
  report.gradient_norm = std::sqrt(sq);
  if (config.learning_rate > 0.0) {
    std::span<double> w = policy.mutable_weights();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * lg.gradient[k];
    report.loss_after = preference_loss(policy, ref, pairs, config).loss;
  } else {
    report.loss_after = lg.loss;
  }
  return report;
}

}  // namespace toolrft
