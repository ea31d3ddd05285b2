#include "hybrid/hybrid.hpp"

#include <string>

#include "common/errors.hpp"

namespace pglake::hybrid {

ad::Tensor augment_features(const ad::Tensor& drivers, const ad::Tensor& y_phy) {
  if (drivers.rows() != y_phy.rows())
    throw ShapeError("augment_features: " + std::to_string(drivers.rows()) +
                     " driver rows vs " + std::to_string(y_phy.rows()) + " physics rows");
  ad::Tensor out(drivers.rows(), drivers.cols() + y_phy.cols());
  for (std::size_t t = 0; t < drivers.rows(); ++t) {
    for (std::size_t j = 0; j < drivers.cols(); ++j) out(t, j) = drivers(t, j);
    for (std::size_t j = 0; j < y_phy.cols(); ++j) out(t, drivers.cols() + j) = y_phy(t, j);
  }
  return out;
}

FilledTargets fill_pseudo_labels(const sim::ObservationSet& obs, const ad::Tensor& y_phy,
                                 double w_obs, double w_phy) {
  if (!(w_obs > 0.0)) throw ConfigError("observation weight must be > 0");
  if (w_phy < 0.0) throw ConfigError("pseudo-label weight must be >= 0");
  if (obs.steps != y_phy.rows() || obs.depths != y_phy.cols())
    throw ShapeError("fill_pseudo_labels: observations are " + std::to_string(obs.steps) + "x" +
                     std::to_string(obs.depths) + " but physics output is " + y_phy.shape_str());
  FilledTargets out;
  out.targets = y_phy;
  out.weights = ad::Tensor::full(y_phy.rows(), y_phy.cols(), w_phy);
  for (const auto& e : obs.entries) {
    out.targets(e.t, e.depth) = e.value_c;
    out.weights(e.t, e.depth) = w_obs;
  }
  return out;
}

FilledTargets observed_targets(const sim::ObservationSet& obs, double w_obs) {
  if (!(w_obs > 0.0)) throw ConfigError("observation weight must be > 0");
  FilledTargets out;
  out.targets = ad::Tensor(obs.steps, obs.depths);
  out.weights = ad::Tensor(obs.steps, obs.depths);
  for (const auto& e : obs.entries) {
    out.targets(e.t, e.depth) = e.value_c;
    out.weights(e.t, e.depth) = w_obs;
  }
  return out;
}

}  // namespace pglake::hybrid
