#pragma once

#include <span>
#include <vector>

#include "toolrft/policy/policy.hpp"

namespace toolrft {

/// Mean negative gold log-likelihood over `batch`; fills `grad` when non-null.
double sft_loss(const LinearPolicy& policy, std::span<const Example> batch,
                std::vector<double>* grad = nullptr);

/// One gradient-descent step on sft_loss. Returns the pre-update loss.
double sft_update(LinearPolicy& policy, std::span<const Example> batch, double learning_rate);

}  // namespace toolrft
