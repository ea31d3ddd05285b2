#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ad/tensor.hpp"
#include "common/dates.hpp"
#include "physics/physics.hpp"
#include "sim/lakesim.hpp"

namespace pglake::train {

// Season buckets: winter is Dec/Jan/Feb, summer Jun/Jul/Aug. Empty buckets
// are reported as absent, never as zero.
struct Metrics {
  std::optional<double> rmse_overall;
  std::optional<double> rmse_winter;
  std::optional<double> rmse_summer;
  std::optional<double> phy_inconsistency;
};

inline bool is_winter_month(int m) { return m == 12 || m == 1 || m == 2; }
inline bool is_summer_month(int m) { return m == 6 || m == 7 || m == 8; }

// RMSE over observed cells with time index in [t0, t1); pred row r holds
// time index pred_row0 + r.
double rmse_observed(const ad::Tensor& pred, std::size_t pred_row0,
                     const sim::ObservationSet& obs, std::size_t t0, std::size_t t1);

// Full metric set over the span [span_begin, span_begin + pred.rows()).
// RMSE uses observed cells only; phy-inconsistency covers every predicted
// cell and needs a grid with at least two depths (absent otherwise).
Metrics evaluate(const ad::Tensor& pred, std::size_t span_begin, const sim::ObservationSet& obs,
                 const std::vector<EpochDay>& timestamps, const physics::DepthGrid* grid);

}  // namespace pglake::train
