#include "toolrft/buffer/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "toolrft/error.hpp"

namespace toolrft {

ReplayBuffer init_buffer(std::span<const Example> rl_dataset,
                         std::span<const std::string> warmup_ids) {
  if (rl_dataset.empty()) throw PreconditionError("replay buffer needs a non-empty RL split");
  const std::set<std::string> warm(warmup_ids.begin(), warmup_ids.end());
  std::set<std::string> seen;
  std::vector<ReplayEntry> entries;
  entries.reserve(rl_dataset.size());
  for (const Example& ex : rl_dataset) {
    if (warm.contains(ex.id)) {
      throw PreconditionError("RL example '" + ex.id + "' also appears in the warm-up data");
    }
    if (!seen.insert(ex.id).second) {
      throw PreconditionError("duplicate example id '" + ex.id + "' in RL split");
    }
    entries.push_back(ReplayEntry{ex, std::nullopt, 0});
  }
  return ReplayBuffer(std::move(entries));
}

void ReplayBuffer::refresh(const Policy& policy, std::size_t iteration, PerplexityOptions options) {
  for (ReplayEntry& e : entries_) {
    e.complexity = perplexity(policy, e.example, options);
    e.last_refresh_iteration = iteration;
  }
  stale_ = false;
}

std::size_t hard_sample_size(std::size_t n, double alpha_percent) {
  if (!(alpha_percent > 0.0 && alpha_percent <= 100.0)) {
    throw PreconditionError("alpha percent must lie in (0, 100]");
  }
  // ceil with a guard against products such as 20 * 60 / 100 landing a hair above 12
  const double exact = alpha_percent * static_cast<double>(n) / 100.0;
  const double rounded = std::round(exact);
  const double k = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(n, static_cast<std::size_t>(k));
}

std::vector<Example> ReplayBuffer::sample_hard(double alpha_percent) const {
  if (stale_) throw PreconditionError("replay buffer is stale; refresh it with the current policy");
  const std::size_t k = hard_sample_size(entries_.size(), alpha_percent);
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = *entries_[a].complexity;
    const double cb = *entries_[b].complexity;
    if (ca != cb) return ca > cb;
    return entries_[a].example.id > entries_[b].example.id;
  });
  std::vector<Example> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(entries_[order[i]].example);
  return out;
}

std::vector<Json> ReplayBuffer::to_jsonl() const {
  std::vector<Json> lines;
  lines.reserve(entries_.size());
  for (const ReplayEntry& e : entries_) {
    Json j;
    j["id"] = e.example.id;
    j["complexity"] = e.complexity ? Json(*e.complexity) : Json(nullptr);
    j["iteration"] = e.last_refresh_iteration;
    lines.push_back(std::move(j));
  }
  return lines;
}

void write_buffer_jsonl(const std::filesystem::path& path, const ReplayBuffer& buffer) {
  write_jsonl(path, buffer.to_jsonl());
}

}  // namespace toolrft
