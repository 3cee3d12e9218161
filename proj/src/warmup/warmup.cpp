#include "toolrft/warmup/warmup.hpp"

#include <set>

#include "toolrft/error.hpp"
#include "toolrft/policy/training.hpp"
#include "toolrft/rng.hpp"
#include "toolrft/toolspace/difficulty.hpp"

namespace toolrft {
namespace {

std::size_t run_epochs(LinearPolicy& policy, std::vector<Example> order, std::size_t epochs,
                       double lr, std::size_t batch_size, Rng* shuffler,
                       std::vector<std::string>& visited) {
  std::size_t steps = 0;
  for (std::size_t e = 0; e < epochs; ++e) {
    if (shuffler) shuffler->shuffle(std::span(order));
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      const std::size_t n = std::min(batch_size, order.size() - i);
      std::span<const Example> batch(order.data() + i, n);
      sft_update(policy, batch, lr);
      for (const auto& ex : batch) visited.push_back(ex.id);
      ++steps;
    }
  }
  return steps;
}

}  // namespace

CurriculumPlan CurriculumPlan::easy_to_hard(std::span<const Example> dataset, std::size_t epochs,
                                            double learning_rate, std::size_t batch_size) {
  DifficultySplit split = split_by_difficulty(dataset);
  CurriculumPlan plan;
  plan.batch_size = batch_size;
  plan.stages.push_back({"easy", std::move(split.easy), epochs, learning_rate});
  plan.stages.push_back({"medium", std::move(split.medium), epochs, learning_rate});
  plan.stages.push_back({"hard", std::move(split.hard), epochs, learning_rate});
  return plan;
}

void CurriculumPlan::validate() const {
  static const char* kOrder[] = {"easy", "medium", "hard"};
  if (stages.size() != 3) throw PreconditionError("curriculum needs exactly three stages");
  if (batch_size == 0) throw PreconditionError("batch_size must be positive");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].name != kOrder[i]) {
      throw PreconditionError("curriculum stages must run easy -> medium -> hard");
    }
    if (stages[i].dataset.empty()) throw PreconditionError("empty stage: " + stages[i].name);
    if (!(stages[i].learning_rate >= 0.0)) throw PreconditionError("negative learning rate");
    for (const auto& ex : stages[i].dataset) {
      if (!ids.insert(ex.id).second) throw PreconditionError("stage datasets overlap at " + ex.id);
    }
  }
}

std::size_t TrainingReport::total_steps() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.steps;
  return n;
}

Json TrainingReport::to_json() const {
  Json j;
  Json arr = Json::array();
  for (const auto& s : stages) {
    Json st;
    st["name"] = s.name;
    st["steps"] = s.steps;
    st["loss_before"] = s.loss_before;
    st["mean_loss"] = s.mean_loss;
    arr.push_back(std::move(st));
  }
  j["stages"] = std::move(arr);
  j["total_loss"] = total_loss;
  j["visited_ids"] = visited_ids;
  return j;
}

TrainingReport warmup_train(LinearPolicy& policy, const CurriculumPlan& plan) {
  plan.validate();
  TrainingReport report;
  for (const auto& stage : plan.stages) {
    StageReport sr;
    sr.name = stage.name;
    sr.loss_before = sft_loss(policy, stage.dataset);
    sr.steps = run_epochs(policy, stage.dataset, stage.epochs, stage.learning_rate, plan.batch_size,
                          nullptr, report.visited_ids);
    sr.mean_loss = sft_loss(policy, stage.dataset);
    report.total_loss += sr.mean_loss;
    report.stages.push_back(std::move(sr));
  }
  return report;
}

TrainingReport mixed_train(LinearPolicy& policy, std::span<const Example> dataset,
                           std::size_t epochs, double learning_rate, std::uint64_t seed,
                           std::size_t batch_size) {
  if (dataset.empty()) throw PreconditionError("empty dataset");
  if (batch_size == 0) throw PreconditionError("batch_size must be positive");
  Rng rng(seed);
  TrainingReport report;
  StageReport sr;
  sr.name = "mixed";
  sr.loss_before = sft_loss(policy, dataset);
  sr.steps = run_epochs(policy, std::vector<Example>(dataset.begin(), dataset.end()), epochs,
                        learning_rate, batch_size, &rng, report.visited_ids);
  sr.mean_loss = sft_loss(policy, dataset);
  report.total_loss = sr.mean_loss;
  report.stages.push_back(std::move(sr));
  return report;
}

}  // namespace toolrft
