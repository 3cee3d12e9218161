#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toolrft/policy/policy.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {

/// <q, T, c>: an RL example and its complexity under the latest policy.
struct ReplayEntry {
  Example example;
  std::optional<double> complexity;  // perplexity h; unset until refreshed
  std::size_t last_refresh_iteration = 0;
};

class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  explicit ReplayBuffer(std::vector<ReplayEntry> entries) : entries_(std::move(entries)) {}

  std::span<const ReplayEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// True until refresh() runs, and again after mark_stale().
  bool stale() const { return stale_; }
  /// Invalidate complexities, e.g. after the policy changed.
  void mark_stale() { stale_ = true; }

  /// c = perplexity(policy, example) for every entry, stamped with `iteration`.
  void refresh(const Policy& policy, std::size_t iteration, PerplexityOptions options = {});

  /// Top ceil(alpha% * size) entries by (complexity desc, id desc).
  std::vector<Example> sample_hard(double alpha_percent) const;

  /// {"id", "complexity", "iteration"} per entry; complexity is null before refresh.
  std::vector<Json> to_jsonl() const;

 private:
  std::vector<ReplayEntry> entries_;
  bool stale_ = true;
};

/// One entry per RL example. Throws PreconditionError if the dataset is empty,
/// has duplicate ids, or shares an id with `warmup_ids`.
ReplayBuffer init_buffer(std::span<const Example> rl_dataset,
                         std::span<const std::string> warmup_ids = {});

/// Number of entries sample_hard returns: ceil(alpha * n / 100).
std::size_t hard_sample_size(std::size_t n, double alpha_percent);

void write_buffer_jsonl(const std::filesystem::path& path, const ReplayBuffer& buffer);

}  // namespace toolrft
