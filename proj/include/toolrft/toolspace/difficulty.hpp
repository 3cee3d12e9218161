#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

struct RawDifficulty {
  double n_tools = 0;
  double toolset_chars = 0;
  double n_calls = 0;
};

struct CorpusMaxima {
  double n_tools = 0;
  double toolset_chars = 0;
  double n_calls = 0;
};

struct DifficultyKey {
  std::size_t n_tools = 0;
  std::size_t toolset_chars = 0;
  std::size_t n_calls = 0;
  double score = 0.0;
};

/// String length of the toolset: bytes of each tool's compact tools.jsonl line.
std::size_t toolset_chars(std::span<const ToolSpec> tools);

RawDifficulty raw_difficulty(const Example& example);

/// Component-wise maxima; throws PreconditionError if any maximum is zero.
CorpusMaxima corpus_maxima(std::span<const Example> dataset);

/// Equal-weight mean of the three max-normalized keys, each clamped to [0,1].
double normalized_score(const RawDifficulty& raw, const CorpusMaxima& maxima);

DifficultyKey difficulty_score(const Example& example, const CorpusMaxima& maxima);

struct DifficultySplit {
  std::vector<Example> easy;
  std::vector<Example> medium;
  std::vector<Example> hard;
};

/// Sorts ascending by (score, id) and cuts into thirds; the remainder goes to
/// the easier splits first. Requires at least three examples.
DifficultySplit split_by_difficulty(std::span<const Example> dataset);

}  // namespace toolrft
