#pragma once

#include <vector>

#include "ad/graph.hpp"
#include "hybrid/hybrid.hpp"
#include "physics/physics.hpp"

namespace pglake::train {

// Coefficients of the composite training loss. The supervised weight is
// fixed at 1; the energy term is divided by energy_scale (median per-step
// |dH| of the reference field) so both penalties are O(1).
struct LossWeights {
  double lambda_dp = 0.0;
  double lambda_ec = 0.0;
  double w_obs = 1.0;
  double w_phy = 0.0;
  double tau_joules = 0.0;
  double energy_scale = 1.0;
};

// Weighted MSE over cells plus the physics penalties:
//   sum w*(pred-target)^2 / sum w
//   + lambda_dp * density_penalty(pred)
//   + lambda_ec * energy_penalty(pred, met, tau) / energy_scale
// grid may be null when both lambdas are zero (scalar targets).
ad::Graph::NodeId total_loss_node(ad::Graph& g, ad::Graph::NodeId pred_c,
                                  const ad::Tensor& targets, const ad::Tensor& weights,
                                  const std::vector<physics::MetRow>& met,
                                  const physics::DepthGrid* grid, const LossWeights& lw,
                                  const physics::FluxParams& flux = physics::FluxParams{});

// Value-level wrapper for a fixed prediction field.
double total_loss(const physics::TempField& pred, const hybrid::TrainingTensor& data,
                  const LossWeights& lw,
                  const physics::FluxParams& flux = physics::FluxParams{},
                  const std::vector<physics::MetRow>* met = nullptr);

}  // namespace pglake::train
