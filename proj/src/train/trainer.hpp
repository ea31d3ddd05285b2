#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hybrid/hybrid.hpp"
#include "nn/model.hpp"
#include "physics/physics.hpp"
#include "sim/lakesim.hpp"
#include "train/adam.hpp"
#include "train/loss.hpp"
#include "train/metrics.hpp"

namespace pglake::train {

struct TrainHyper {
  std::size_t hidden = 32;
  std::size_t window = 200;  // days per BPTT window, stride window/2
  std::size_t epochs = 60;
  std::size_t batch_windows = 2;
  AdamParams adam;
  double val_fraction = 0.2;  // tail of the training period held out
};

// Experiment-level loss knobs; variants switch individual terms off.
struct LossConfig {
  double lambda_dp = 1.0;
  double lambda_ec = 0.01;
  double w_obs = 1.0;
  double w_phy = 0.2;
  std::optional<double> tau_joules;  // default: 5% of median per-step |dH|
};

// One assembled training problem: inputs/targets in physical units, the
// chronological split point, and whatever the penalties need.
struct Dataset {
  ad::Tensor inputs;   // T x D
  ad::Tensor targets;  // T x n_out
  ad::Tensor weights;  // T x n_out
  std::vector<EpochDay> timestamps;
  std::vector<physics::MetRow> met;        // empty when the energy term is off
  std::optional<physics::DepthGrid> grid;  // absent for scalar targets
  const sim::ObservationSet* obs = nullptr;
  std::size_t train_end = 0;

  std::size_t steps() const { return inputs.rows(); }
};

struct HistoryRow {
  std::size_t epoch;
  double train_loss;
  double val_rmse;
};

struct TrainResult {
  nn::Model model;
  std::vector<HistoryRow> history;
};

// Slack and normalizer for the energy term, from a reference field's
// per-step heat-content changes over the training rows.
struct EnergyCalibration {
  double tau_joules;
  double scale;
};
EnergyCalibration calibrate_energy(const physics::TempField& reference, std::size_t train_end,
                                   double slack_fraction = 0.05);

// Variant wiring for the depth-profile experiment: rnn/ann see drivers only
// and train on observations; pgrnn0 adds the physics feature and
// pseudo-labels; pgrnn adds both penalty terms. y_phy may be null for the
// variants that use neither.
Dataset prepare_field_dataset(nn::Variant v, const sim::DriverSeries& drivers,
                              const physics::TempField* y_phy, const sim::ObservationSet& obs,
                              const physics::DepthGrid& grid, const LossConfig& cfg,
                              std::size_t train_end, LossWeights& out_weights);

// Scalar-series analogue; no spatial penalties apply.
Dataset prepare_scalar_dataset(nn::Variant v, const sim::DriverSeries& drivers,
                               const std::vector<double>& phy, const sim::ObservationSet& obs,
                               const LossConfig& cfg, std::size_t train_end,
                               LossWeights& out_weights);

// Sliding-window BPTT with the composite loss, best-validation selection,
// deterministic for a fixed seed.
TrainResult train_model(nn::Variant v, const Dataset& ds, const LossWeights& lw,
                        const TrainHyper& hyper, std::uint64_t seed);

// Prediction over rows [begin, end) from zero initial state, physical units.
ad::Tensor predict_span(nn::Model& model, const Dataset& ds, std::size_t begin,
                        std::size_t end);

}  // namespace pglake::train
