#include "toolrft/toolspace/difficulty.hpp"

#include <algorithm>

#include "toolrft/error.hpp"
#include "toolrft/toolspace/serialization.hpp"

namespace toolrft {

std::size_t toolset_chars(std::span<const ToolSpec> tools) {
  std::size_t total = 0;
  for (const auto& t : tools) total += to_json(t).dump().size();
  return total;
}

RawDifficulty raw_difficulty(const Example& example) {
  return RawDifficulty{static_cast<double>(example.tools.size()),
                       static_cast<double>(toolset_chars(example.tools)),
                       static_cast<double>(example.gold_call_count())};
}

CorpusMaxima corpus_maxima(std::span<const Example> dataset) {
  CorpusMaxima m;
  for (const auto& ex : dataset) {
    RawDifficulty r = raw_difficulty(ex);
    m.n_tools = std::max(m.n_tools, r.n_tools);
    m.toolset_chars = std::max(m.toolset_chars, r.toolset_chars);
    m.n_calls = std::max(m.n_calls, r.n_calls);
  }
  if (m.n_tools <= 0 || m.toolset_chars <= 0 || m.n_calls <= 0) {
    throw PreconditionError("corpus maxima must be positive");
  }
  return m;
}

double normalized_score(const RawDifficulty& raw, const CorpusMaxima& maxima) {
  if (maxima.n_tools <= 0 || maxima.toolset_chars <= 0 || maxima.n_calls <= 0) {
    throw PreconditionError("corpus maxima must be positive");
  }
  auto term = [](double v, double max) { return std::clamp(v / max, 0.0, 1.0); };
  return (term(raw.n_tools, maxima.n_tools) + term(raw.toolset_chars, maxima.toolset_chars) +
          term(raw.n_calls, maxima.n_calls)) /
         3.0;
}

DifficultyKey difficulty_score(const Example& example, const CorpusMaxima& maxima) {
  RawDifficulty raw = raw_difficulty(example);
  DifficultyKey key;
  key.n_tools = static_cast<std::size_t>(raw.n_tools);
  key.toolset_chars = static_cast<std::size_t>(raw.toolset_chars);
  key.n_calls = static_cast<std::size_t>(raw.n_calls);
  key.score = normalized_score(raw, maxima);
  return key;
}

DifficultySplit split_by_difficulty(std::span<const Example> dataset) {
  if (dataset.size() < 3) throw PreconditionError("need at least 3 examples to split");
  CorpusMaxima maxima = corpus_maxima(dataset);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    keyed.emplace_back(difficulty_score(dataset[i], maxima).score, i);
  }
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return dataset[a.second].id < dataset[b.second].id;
  });
  const std::size_t n = dataset.size();
  const std::size_t base = n / 3;
  const std::size_t rem = n % 3;
  const std::size_t n_easy = base + (rem > 0 ? 1 : 0);
  const std::size_t n_medium = base + (rem > 1 ? 1 : 0);
  DifficultySplit split;
  for (std::size_t k = 0; k < n; ++k) {
    const Example& ex = dataset[keyed[k].second];
    if (k < n_easy) {
      split.easy.push_back(ex);
    } else if (k < n_easy + n_medium) {
      split.medium.push_back(ex);
    } else {
      split.hard.push_back(ex);
    }
  }
  return split;
}

}  // namespace toolrft
