#include "physics/physics.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace pglake::physics {

double density(double temp_c) {
  if (!std::isfinite(temp_c)) throw NumericError("density: non-finite temperature");
  if (temp_c <= kDensityPoleC)
    throw NumericError("density: temperature " + std::to_string(temp_c) +
                       " C at or below the pole " + std::to_string(kDensityPoleC));
  return water_density(temp_c);
}

DepthGrid::DepthGrid(std::vector<double> depths, std::vector<double> areas)
    : depths_m(std::move(depths)), layer_areas_m2(std::move(areas)) {
  const std::size_t m = depths_m.size();
  if (m < 2) throw ConfigError("depth grid needs at least two layers");
  if (layer_areas_m2.size() != m)
    throw ShapeError("depth grid has " + std::to_string(m) + " depths but " +
                     std::to_string(layer_areas_m2.size()) + " areas");
  if (depths_m.front() < 0.0) throw ConfigError("surface depth must be >= 0");
  for (std::size_t d = 0; d + 1 < m; ++d) {
    if (!(depths_m[d] < depths_m[d + 1]))
      throw ConfigError("depths must be strictly increasing");
    if (layer_areas_m2[d + 1] > layer_areas_m2[d])
      throw ConfigError("layer areas must be non-increasing with depth");
  }
  layer_volumes_m3.resize(m);
  for (std::size_t d = 0; d < m; ++d) {
    const double thickness =
        d + 1 < m ? depths_m[d + 1] - depths_m[d] : depths_m[m - 1] - depths_m[m - 2];
    layer_volumes_m3[d] = layer_areas_m2[d] * thickness;
    if (!(layer_volumes_m3[d] > 0.0)) throw ConfigError("layer volumes must be positive");
  }
}

DepthGrid DepthGrid::uniform(double max_depth_m, double step_m, double surface_area_m2,
                             double area_taper) {
  if (!(max_depth_m > 0.0) || !(step_m > 0.0))
    throw ConfigError("depth grid extent and step must be positive");
  std::vector<double> depths, areas;
  const int n = static_cast<int>(std::floor(max_depth_m / step_m + 0.5)) + 1;
  for (int i = 0; i < n; ++i) {
    const double z = i * step_m;
    const double frac = max_depth_m > 0.0 ? z / max_depth_m : 0.0;
    depths.push_back(z);
    areas.push_back(surface_area_m2 * (1.0 - (1.0 - area_taper) * frac));
  }
  return DepthGrid(std::move(depths), std::move(areas));
}

double DepthGrid::total_volume() const {
  double v = 0.0;
  for (double x : layer_volumes_m3) v += x;
  return v;
}

TempField::TempField(ad::Tensor v, DepthGrid g, std::vector<EpochDay> ts)
    : values(std::move(v)), grid(std::move(g)), timestamps(std::move(ts)) {
  if (values.cols() != grid.size())
    throw ShapeError("field has " + std::to_string(values.cols()) + " depth columns but grid has " +
                     std::to_string(grid.size()));
  if (timestamps.size() != values.rows())
    throw ShapeError("field has " + std::to_string(values.rows()) + " rows but " +
                     std::to_string(timestamps.size()) + " timestamps");
  if (!values.all_finite()) throw NumericError("temperature field contains non-finite values");
  for (std::size_t t = 0; t + 1 < timestamps.size(); ++t) {
    if (timestamps[t + 1] - timestamps[t] != timestamps[1] - timestamps[0] ||
        timestamps[t + 1] <= timestamps[t])
      throw ConfigError("field timestamps must be strictly increasing and uniformly spaced");
  }
}

double heat_content(const std::vector<double>& profile_c, const DepthGrid& grid) {
  if (profile_c.size() != grid.size())
    throw ShapeError("profile has " + std::to_string(profile_c.size()) + " layers, grid has " +
                     std::to_string(grid.size()));
  double h = 0.0;
  for (std::size_t d = 0; d < grid.size(); ++d)
    h += kRhoRef * kCWater * grid.layer_volumes_m3[d] * profile_c[d];
  return h;
}

double heat_content_row(const ad::Tensor& field, std::size_t row, const DepthGrid& grid) {
  if (field.cols() != grid.size())
    throw ShapeError("field/grid depth mismatch in heat_content_row");
  double h = 0.0;
  for (std::size_t d = 0; d < grid.size(); ++d)
    h += kRhoRef * kCWater * grid.layer_volumes_m3[d] * field(row, d);
  return h;
}

double volume_avg_temp(const std::vector<double>& profile_c, const DepthGrid& grid) {
  if (profile_c.size() != grid.size())
    throw ShapeError("profile has " + std::to_string(profile_c.size()) + " layers, grid has " +
                     std::to_string(grid.size()));
  double num = 0.0, den = 0.0;
  for (std::size_t d = 0; d < grid.size(); ++d) {
    num += grid.layer_volumes_m3[d] * profile_c[d];
    den += grid.layer_volumes_m3[d];
  }
  return num / den;
}

FluxCoeffs flux_coeffs(const MetRow& met, const FluxParams& p) {
  if (!std::isfinite(met.shortwave_wm2) || !std::isfinite(met.longwave_wm2) ||
      !std::isfinite(met.air_temp_c) || !std::isfinite(met.wind_ms) ||
      !std::isfinite(met.rel_humidity))
    throw NumericError("net_surface_flux: non-finite driver value");
  const double sensible_coeff = p.rho_air * p.cp_air * p.bulk_coeff * met.wind_ms;
  const double latent_coeff =
      p.rho_air * p.latent_heat * p.bulk_coeff * met.wind_ms * p.moisture_ratio / p.pressure;
  const double e_air = met.rel_humidity * (p.sat_vp_base + p.sat_vp_slope * met.air_temp_c);
  FluxCoeffs c;
  c.k0 = (1.0 - p.albedo) * met.shortwave_wm2 + met.longwave_wm2 +
         sensible_coeff * met.air_temp_c + latent_coeff * (e_air - p.sat_vp_base);
  c.k1 = sensible_coeff + latent_coeff * p.sat_vp_slope;
  return c;
}

double net_surface_flux(const MetRow& met, double surface_temp_c, const FluxParams& p) {
  if (!std::isfinite(surface_temp_c))
    throw NumericError("net_surface_flux: non-finite surface temperature");
  return net_flux(flux_coeffs(met, p), surface_temp_c, p);
}

double density_penalty(const TempField& field) {
  const std::size_t steps = field.steps(), m = field.depths();
  if (m < 2) throw ShapeError("density_penalty needs at least two depths");
  double acc = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double rho_up = density(field.values(t, 0));
    for (std::size_t d = 0; d + 1 < m; ++d) {
      const double rho_down = density(field.values(t, d + 1));
      const double v = rho_up - rho_down;
      if (v > 0.0) acc += v;
      rho_up = rho_down;
    }
  }
  return acc / (static_cast<double>(steps) * static_cast<double>(m - 1));
}

ad::Graph::NodeId density_penalty_node(ad::Graph& g, ad::Graph::NodeId pred_c) {
  const ad::Tensor& v = g.value(pred_c);
  const std::size_t steps = v.rows(), m = v.cols();
  if (m < 2) throw ShapeError("density_penalty needs at least two depths");
  const ad::Expr rho = water_density(ad::Expr{&g, pred_c});
  const auto shallow = g.slice(rho.id, 0, steps, 0, m - 1);
  const auto deep = g.slice(rho.id, 0, steps, 1, m);
  return g.mean(g.relu(g.sub(shallow, deep)));
}

double phy_inconsistency(const TempField& field, double tolerance) {
  if (tolerance < 0.0) throw ConfigError("phy_inconsistency tolerance must be >= 0");
  const std::size_t steps = field.steps(), m = field.depths();
  if (m < 2) throw ShapeError("phy_inconsistency needs at least two depths");
  std::size_t violations = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    double rho_up = density(field.values(t, 0));
    for (std::size_t d = 0; d + 1 < m; ++d) {
      const double rho_down = density(field.values(t, d + 1));
      if (rho_up - rho_down > tolerance) ++violations;
      rho_up = rho_down;
    }
  }
  return static_cast<double>(violations) /
         (static_cast<double>(steps) * static_cast<double>(m - 1));
}

double energy_penalty(const TempField& field, const std::vector<MetRow>& met, double tau_joules,
                      const FluxParams& p) {
  const std::size_t steps = field.steps();
  if (steps < 2) throw ShapeError("energy_penalty needs at least two timesteps");
  if (met.size() + 1 < steps)
    throw ShapeError("energy_penalty: " + std::to_string(met.size()) + " driver rows for " +
                     std::to_string(steps) + " field rows");
  if (tau_joules < 0.0) throw ConfigError("energy_penalty slack must be >= 0");
  const double area_dt = field.grid.surface_area() * kSecondsPerDay *
                         static_cast<double>(field.timestamps[1] - field.timestamps[0]);
  double acc = 0.0;
  double h_prev = heat_content_row(field.values, 0, field.grid);
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const double h_next = heat_content_row(field.values, t + 1, field.grid);
    const double phi = net_surface_flux(met[t], field.values(t, 0), p);
    const double excess = std::fabs(h_next - h_prev - phi * area_dt) - tau_joules;
    if (excess > 0.0) acc += excess;
    h_prev = h_next;
  }
  return acc / static_cast<double>(steps - 1);
}

ad::Graph::NodeId energy_penalty_node(ad::Graph& g, ad::Graph::NodeId pred_c,
                                      const std::vector<MetRow>& met, const DepthGrid& grid,
                                      double tau_joules, const FluxParams& p, double step_days) {
  const ad::Tensor& v = g.value(pred_c);
  const std::size_t steps = v.rows(), m = v.cols();
  if (steps < 2) throw ShapeError("energy_penalty needs at least two timesteps");
  if (m != grid.size()) throw ShapeError("energy_penalty: field/grid depth mismatch");
  if (met.size() + 1 < steps) throw ShapeError("energy_penalty: too few driver rows");
  if (tau_joules < 0.0) throw ConfigError("energy_penalty slack must be >= 0");

  std::vector<double> vw(m), k0(steps - 1), k1(steps - 1);
  for (std::size_t d = 0; d < m; ++d) vw[d] = kRhoRef * kCWater * grid.layer_volumes_m3[d];
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const FluxCoeffs c = flux_coeffs(met[t], p);
    k0[t] = c.k0;
    k1[t] = c.k1;
  }
  const double area_dt = grid.surface_area() * kSecondsPerDay * step_days;

  const auto heat = g.matmul(pred_c, g.constant(ad::Tensor::column(std::move(vw)), "heat_weights"));
  const auto delta_h = g.sub(g.slice(heat, 1, steps, 0, 1), g.slice(heat, 0, steps - 1, 0, 1));
  const ad::Expr ts{&g, g.slice(pred_c, 0, steps - 1, 0, 1)};
  const ad::Expr k0e{&g, g.constant(ad::Tensor::column(std::move(k0)), "flux_k0")};
  const ad::Expr k1e{&g, g.constant(ad::Tensor::column(std::move(k1)), "flux_k1")};
  const ad::Expr phi = k0e - k1e * ts -
                       (p.emissivity * p.stefan_boltzmann) * square(square(ts + 273.15));
  const auto resid = g.sub(delta_h, g.scale(phi.id, area_dt));
  return g.mean(g.relu(g.add_scalar(g.abs(resid), -tau_joules)));
}

std::optional<double> thermocline_depth(const std::vector<double>& profile_c,
                                        const DepthGrid& grid) {
  const std::size_t m = grid.size();
  if (profile_c.size() != m)
    throw ShapeError("thermocline_depth: profile/grid length mismatch");
  if (m < 2) throw ShapeError("thermocline_depth needs at least two depths");
  double best = -1.0;
  std::size_t best_d = 0;
  for (std::size_t d = 0; d + 1 < m; ++d) {
    const double dz = grid.depths_m[d + 1] - grid.depths_m[d];
    const double gradient = std::fabs(profile_c[d + 1] - profile_c[d]) / dz;
    if (gradient > best) {
      best = gradient;
      best_d = d;
    }
  }
  if (best < kThermoclineCutoffCPerM) return std::nullopt;
  return 0.5 * (grid.depths_m[best_d] + grid.depths_m[best_d + 1]);
}

}  // namespace pglake::physics
