#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {

struct CurriculumStage {
  std::string name;  // easy, medium, hard (or mixed)
  std::vector<Example> dataset;
  std::size_t epochs = 1;
  double learning_rate = 0.05;
};

struct CurriculumPlan {
  std::vector<CurriculumStage> stages;
  std::size_t batch_size = 1;

  /// Splits `dataset` by difficulty into easy -> medium -> hard stages.
  static CurriculumPlan easy_to_hard(std::span<const Example> dataset, std::size_t epochs,
                                     double learning_rate, std::size_t batch_size = 1);

  /// Stage names must be exactly easy, medium, hard with disjoint, non-empty datasets.
  void validate() const;
};

struct StageReport {
  std::string name;
  std::size_t steps = 0;
  double loss_before = 0;  // mean SFT loss on the stage data before the stage
  double mean_loss = 0;    // ... and after it
};

struct TrainingReport {
  std::vector<StageReport> stages;
  double total_loss = 0;  // sum of the stages' mean losses
  std::vector<std::string> visited_ids;

  std::size_t total_steps() const;
  Json to_json() const;
};

/// Sequential SFT over the plan's stages, no replay of earlier stages.
TrainingReport warmup_train(LinearPolicy& policy, const CurriculumPlan& plan);

/// Single stage over the shuffled union, reshuffled every epoch.
TrainingReport mixed_train(LinearPolicy& policy, std::span<const Example> dataset,
                           std::size_t epochs, double learning_rate, std::uint64_t seed,
                           std::size_t batch_size = 1);

}  // namespace toolrft
