#pragma once

#include <string_view>
#include <vector>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

/// Splits a free-form response into call steps (embedded `name(...)`
/// expressions) and text steps (sentences ending in . ! or ?), then appends a
/// terminal step. Fragments without a letter or digit are dropped. A
/// malformed embedded call raises ParseError.
std::vector<Step> segment_steps(std::string_view response_text);

}  // namespace toolrft
