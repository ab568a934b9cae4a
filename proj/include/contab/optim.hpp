#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "contab/tensor.hpp"

namespace contab {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(std::span<Parameter* const> params, AdamConfig cfg);
};

/// One bias-corrected Adam update of every parameter from its `grad`.
/// Increments state.t once. Throws InputError on any shape disagreement.
void adam_step(std::span<Parameter* const> params, AdamState& state);

void zero_grad(std::span<Parameter* const> params);

}  // namespace contab
