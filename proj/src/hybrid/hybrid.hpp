#pragma once

#include "ad/tensor.hpp"
#include "sim/lakesim.hpp"

namespace pglake::hybrid {

// Training data in physical units: inputs, per-cell targets and per-cell
// loss weights. Weight 0 marks cells with neither an observation nor a
// pseudo-label.
struct TrainingTensor {
  ad::Tensor inputs;   // T x D_aug
  ad::Tensor targets;  // T x n_out
  ad::Tensor weights;  // T x n_out, >= 0
};

// Column-wise concatenation [drivers | y_phy]; the physics output becomes an
// ordinary input feature and is normalized like every other column later.
ad::Tensor augment_features(const ad::Tensor& drivers, const ad::Tensor& y_phy);

// Observed cells carry the observation with weight w_obs; missing cells take
// the physics value with weight w_phy. Observations are never overwritten.
struct FilledTargets {
  ad::Tensor targets;
  ad::Tensor weights;
};
FilledTargets fill_pseudo_labels(const sim::ObservationSet& obs, const ad::Tensor& y_phy,
                                 double w_obs, double w_phy);

// Observations only: targets where observed (weight w_obs), weight 0
// elsewhere. The non-hybrid variants train on this.
FilledTargets observed_targets(const sim::ObservationSet& obs, double w_obs);

}  // namespace pglake::hybrid
