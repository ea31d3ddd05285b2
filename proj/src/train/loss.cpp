#include "train/loss.hpp"

#include "common/errors.hpp"

namespace pglake::train {

ad::Graph::NodeId total_loss_node(ad::Graph& g, ad::Graph::NodeId pred_c,
                                  const ad::Tensor& targets, const ad::Tensor& weights,
                                  const std::vector<physics::MetRow>& met,
                                  const physics::DepthGrid* grid, const LossWeights& lw,
                                  const physics::FluxParams& flux) {
  const ad::Tensor& pred = g.value(pred_c);
  if (!pred.same_shape(targets) || !pred.same_shape(weights))
    throw ShapeError("total_loss: predictions " + pred.shape_str() + ", targets " +
                     targets.shape_str() + ", weights " + weights.shape_str() +
                     " must share one shape");
  double weight_sum = 0.0;
  for (double w : weights.data()) {
    if (w < 0.0) throw ConfigError("total_loss: negative cell weight");
    weight_sum += w;
  }
  if (weight_sum <= 0.0) throw ConfigError("total_loss: all cell weights are zero");

  const auto diff = g.sub(pred_c, g.constant(targets, "targets"));
  const auto weighted = g.mul(g.square(diff), g.constant(weights, "cell_weights"));
  auto loss = g.scale(g.sum(weighted), 1.0 / weight_sum);

  if (lw.lambda_dp != 0.0)
    loss = g.add(loss, g.scale(physics::density_penalty_node(g, pred_c), lw.lambda_dp));
  if (lw.lambda_ec != 0.0) {
    if (!grid) throw ConfigError("total_loss: energy penalty requires a depth grid");
    if (!(lw.energy_scale > 0.0))
      throw ConfigError("total_loss: energy_scale must be positive");
    const auto ec =
        physics::energy_penalty_node(g, pred_c, met, *grid, lw.tau_joules, flux);
    loss = g.add(loss, g.scale(ec, lw.lambda_ec / lw.energy_scale));
  }
  return loss;
}

double total_loss(const physics::TempField& pred, const hybrid::TrainingTensor& data,
                  const LossWeights& lw, const physics::FluxParams& flux,
                  const std::vector<physics::MetRow>* met) {
  ad::Graph g;
  const auto pred_node = g.constant(pred.values, "predictions");
  static const std::vector<physics::MetRow> kNoMet;
  const auto& met_rows = met ? *met : kNoMet;
  const auto loss =
      total_loss_node(g, pred_node, data.targets, data.weights, met_rows, &pred.grid, lw, flux);
  return g.value(loss).item();
}

}  // namespace pglake::train
