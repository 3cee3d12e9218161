#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toolrft/pipeline/evaluate.hpp"
#include "toolrft/prefopt/iteration.hpp"
#include "toolrft/toolspace/corpus.hpp"
#include "toolrft/warmup/warmup.hpp"

namespace toolrft {

/// A pipeline phase failed; what() names the phase.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string phase, const std::string& cause)
      : std::runtime_error(phase + ": " + cause), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

enum class WarmupOrder { EasyToHard, Mixed };

std::string_view to_string(WarmupOrder order);
WarmupOrder parse_warmup_order(std::string_view name);

struct WarmupConfig {
  WarmupOrder order = WarmupOrder::EasyToHard;
  std::size_t epochs = 1;  // per stage; mixed mode runs the same visit budget
  double learning_rate = 0.1;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;  // mixed-order shuffling
  bool skip = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  CorpusConfig corpus;
  std::size_t n_eval = 300;
  std::uint64_t eval_seed = 1;
  double warmup_fraction = 0.9;
  double rl_fraction = 0.1;
  std::uint64_t split_seed = 2;
  PolicyConfig policy;
  WarmupConfig warmup;
  SearchConfig search;
  PrefConfig pref;
  std::size_t iterations = 3;
  double alpha_percent = 20;
  ReferenceMode reference = ReferenceMode::Latest;
  EvalOptions eval;
  bool dump_trees = false;

  /// Sets the master seed and derives every component seed from it.
  RunConfig& with_seed(std::uint64_t master);

  void validate() const;
  Json to_json() const;
  static RunConfig from_json(const Json& j);
};

struct DatasetSplit {
  std::vector<Example> warmup;
  std::vector<Example> rl;
};

/// Seeded random partition; each part keeps the input order.
DatasetSplit split_warmup_rl(std::span<const Example> dataset, double warmup_fraction,
                             std::uint64_t seed);

TrainingReport run_warmup(LinearPolicy& policy, std::span<const Example> data,
                          const WarmupConfig& config);

/// Held-out evaluation corpus, generated independently of the training corpus.
std::vector<Example> generate_eval_set(const RunConfig& config);

struct IterationOutcome {
  IterationReport report;
  EvalReport eval;
};

struct RunResult {
  LinearPolicy policy;
  TrainingReport warmup;
  EvalReport warmup_eval;
  std::vector<IterationOutcome> iterations;

  const EvalReport& final_eval() const {
    return iterations.empty() ? warmup_eval : iterations.back().eval;
  }
  Json to_json() const;
};

/// corpus -> 90/10 split -> warm-up -> buffer -> iterations, evaluating after
/// every phase. Artifacts go to `out_dir` when given.
RunResult run_pipeline(const RunConfig& config,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Same as run_pipeline but on a supplied corpus and eval set.
RunResult run_pipeline_on(const RunConfig& config, std::span<const Example> corpus,
                          std::span<const Example> eval_set,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct GainsRow {
  double fraction = 0;
  std::size_t n_examples = 0;
  double sft_accuracy = 0;
  double itool_accuracy = 0;
  double sft_hard = 0;
  double itool_hard = 0;
};

/// For each fraction, runs the pipeline on that prefix of the corpus; the
/// SFT column is the warm-up-only policy of the same run.
std::vector<GainsRow> gains_sweep(const RunConfig& config, std::span<const double> fractions);

std::string gains_csv(std::span<const GainsRow> rows);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace toolrft
