#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "toolrft/policy/state.hpp"

namespace toolrft {

/// Feature basis phi(state, step) of the linear policy.
namespace feature {
inline constexpr std::size_t kKindCall = 0;
inline constexpr std::size_t kKindText = 1;
inline constexpr std::size_t kKindRefuse = 2;
inline constexpr std::size_t kKindTerminal = 3;
inline constexpr std::size_t kNameOverlap = 4;
inline constexpr std::size_t kDescriptionOverlap = 5;
inline constexpr std::size_t kValueInQuery = 6;
inline constexpr std::size_t kBinding = 7;
inline constexpr std::size_t kParamCoverage = 8;
inline constexpr std::size_t kOrderAlignment = 9;
inline constexpr std::size_t kToolRepeat = 10;
inline constexpr std::size_t kValueReuse = 11;
inline constexpr std::size_t kRefuseRelevance = 12;
inline constexpr std::size_t kTerminalUncovered = 13;
inline constexpr std::size_t kTerminalDepth = 14;  // one-hot block of max_depth + 1
}  // namespace feature

std::size_t feature_dim(std::size_t max_depth);

/// Recovers max_depth from a checkpoint's feature dimension.
std::size_t max_depth_for_dim(std::size_t dim);

/// Row-major candidate x feature matrix for `state`.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * cols, cols);
  }
};

FeatureMatrix featurize(const SearchState& state, std::span<const Step* const> candidates);

std::vector<double> step_features(const SearchState& state, const Step& candidate);

}  // namespace toolrft
