#include "train/metrics.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace pglake::train {

double rmse_observed(const ad::Tensor& pred, std::size_t pred_row0,
                     const sim::ObservationSet& obs, std::size_t t0, std::size_t t1) {
  if (pred.cols() != obs.depths)
    throw ShapeError("rmse_observed: prediction width " + std::to_string(pred.cols()) +
                     " vs observation width " + std::to_string(obs.depths));
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& e : obs.entries) {
    if (e.t < t0 || e.t >= t1) continue;
    const std::size_t row = e.t - pred_row0;
    if (row >= pred.rows()) throw ShapeError("rmse_observed: observation outside predictions");
    const double d = pred(row, e.depth) - e.value_c;
    acc += d * d;
    ++count;
  }
  if (count == 0) throw ConfigError("rmse_observed: no observations in range");
  return std::sqrt(acc / static_cast<double>(count));
}

Metrics evaluate(const ad::Tensor& pred, std::size_t span_begin, const sim::ObservationSet& obs,
                 const std::vector<EpochDay>& timestamps, const physics::DepthGrid* grid) {
  const std::size_t span_end = span_begin + pred.rows();
  if (span_end > obs.steps || span_end > timestamps.size())
    throw ShapeError("evaluate: prediction span exceeds observations or timestamps");
  if (pred.cols() != obs.depths)
    throw ShapeError("evaluate: prediction width " + std::to_string(pred.cols()) +
                     " vs observation width " + std::to_string(obs.depths));

  double acc[3] = {0.0, 0.0, 0.0};  // overall, winter, summer
  std::size_t count[3] = {0, 0, 0};
  for (const auto& e : obs.entries) {
    if (e.t < span_begin || e.t >= span_end) continue;
    const double d = pred(e.t - span_begin, e.depth) - e.value_c;
    const int month = month_of(timestamps[e.t]);
    acc[0] += d * d;
    ++count[0];
    if (is_winter_month(month)) {
      acc[1] += d * d;
      ++count[1];
    } else if (is_summer_month(month)) {
      acc[2] += d * d;
      ++count[2];
    }
  }
  if (count[0] == 0) throw ConfigError("evaluate: no test observations in span");

  Metrics m;
  m.rmse_overall = std::sqrt(acc[0] / static_cast<double>(count[0]));
  if (count[1] > 0) m.rmse_winter = std::sqrt(acc[1] / static_cast<double>(count[1]));
  if (count[2] > 0) m.rmse_summer = std::sqrt(acc[2] / static_cast<double>(count[2]));

  if (grid && grid->size() >= 2 && pred.cols() == grid->size()) {
    std::vector<EpochDay> span_ts(timestamps.begin() + static_cast<std::ptrdiff_t>(span_begin),
                                  timestamps.begin() + static_cast<std::ptrdiff_t>(span_end));
    const physics::TempField field(pred, *grid, std::move(span_ts));
    m.phy_inconsistency = physics::phy_inconsistency(field);
  }
  return m;
}

}  // namespace pglake::train
