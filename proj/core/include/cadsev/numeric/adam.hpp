#pragma once

#include <span>

#include "cadsev/numeric/parameter.hpp"

namespace cadsev::num {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update per parameter. Gradients are left as they
/// are; the caller zeroes them before the next accumulation.
void adam_step(std::span<Parameter* const> params, const AdamConfig& config = {});

}  // namespace cadsev::num
