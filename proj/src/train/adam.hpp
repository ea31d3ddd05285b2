#pragma once

#include <cstddef>
#include <vector>

#include "ad/tensor.hpp"

namespace pglake::train {

struct AdamParams {
  double rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
  std::vector<ad::Tensor> m;
  std::vector<ad::Tensor> v;
  std::size_t step = 0;

  static AdamState init(const std::vector<ad::Tensor*>& params);
};

// Standard bias-corrected adaptive-moment update, in place.
void adam_step(const std::vector<ad::Tensor*>& params, const std::vector<ad::Tensor>& grads,
               AdamState& state, const AdamParams& hp);

}  // namespace pglake::train
