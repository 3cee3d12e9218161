#include "toolrft/pipeline/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "toolrft/error.hpp"
#include "toolrft/toolspace/difficulty.hpp"
#include "toolrft/toolspace/grading.hpp"

namespace toolrft {
namespace {

double fraction(std::size_t hits, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

Json EvalReport::to_json() const {
  Json j;
  j["n"] = n;
  j["n_easy"] = n_easy;
  j["n_medium"] = n_medium;
  j["n_hard"] = n_hard;
  j["accuracy_overall"] = accuracy_overall;
  j["accuracy_easy"] = accuracy_easy;
  j["accuracy_medium"] = accuracy_medium;
  j["accuracy_hard"] = accuracy_hard;
  j["n_relevance"] = n_relevance;
  j["n_irrelevance"] = n_irrelevance;
  j["relevance_rate"] = relevance_rate;
  j["irrelevance_rate"] = irrelevance_rate;
  return j;
}

std::vector<Step> decode(const Policy& policy, const Example& example, Decoding decoding, Rng* rng) {
  if (decoding == Decoding::Sample && rng == nullptr) {
    throw PreconditionError("sampled decoding needs a generator");
  }
  SearchState state = SearchState::root(example, policy.config());
  while (!state.is_terminal()) {
    const std::vector<double> logp = policy.candidate_log_probs(state);
    std::size_t pick = 0;
    if (decoding == Decoding::Greedy) {
      pick = static_cast<std::size_t>(std::max_element(logp.begin(), logp.end()) - logp.begin());
    } else {
      std::vector<double> probs(logp.size());
      std::transform(logp.begin(), logp.end(), probs.begin(), [](double l) { return std::exp(l); });
      pick = rng->categorical(probs);
    }
    state = state.extend(*candidate_refs(state)[pick]);
  }
  return {state.steps().begin(), state.steps().end()};
}

EvalReport evaluate(const Policy& policy, std::span<const Example> eval_set,
                    const EvalOptions& options) {
  const DifficultySplit split = split_by_difficulty(eval_set);
  std::map<std::string, int> bucket;  // 0 easy, 1 medium, 2 hard
  for (const Example& e : split.easy) bucket[e.id] = 0;
  for (const Example& e : split.medium) bucket[e.id] = 1;
  for (const Example& e : split.hard) bucket[e.id] = 2;

  Rng rng(options.seed);
  std::size_t hits[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  std::size_t relevant_kept = 0;
  std::size_t irrelevant_refused = 0;
  EvalReport r;
  for (const Example& ex : eval_set) {
    const std::vector<Step> pred = decode(policy, ex, options.decoding, &rng);
    const bool exact = match_response(pred, ex.gold, ex.tools).exact;
    const int b = bucket.at(ex.id);
    ++counts[b];
    if (exact) ++hits[b];
    const bool refused = std::any_of(pred.begin(), pred.end(), [](const Step& s) { return s.is_refuse(); });
    if (ex.is_irrelevance()) {
      ++r.n_irrelevance;
      if (refused) ++irrelevant_refused;
    } else {
      ++r.n_relevance;
      if (!refused) ++relevant_kept;
    }
  }
  r.n = eval_set.size();
  r.n_easy = counts[0];
  r.n_medium = counts[1];
  r.n_hard = counts[2];
  r.accuracy_easy = fraction(hits[0], counts[0]);
  r.accuracy_medium = fraction(hits[1], counts[1]);
  r.accuracy_hard = fraction(hits[2], counts[2]);
  r.accuracy_overall = fraction(hits[0] + hits[1] + hits[2], r.n);
  r.relevance_rate = fraction(relevant_kept, r.n_relevance);
  r.irrelevance_rate = fraction(irrelevant_refused, r.n_irrelevance);
  return r;
}

}  // namespace toolrft
