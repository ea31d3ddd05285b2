#pragma once

#include <optional>
#include <vector>

#include "ad/expr.hpp"
#include "ad/graph.hpp"
#include "ad/tensor.hpp"
#include "common/dates.hpp"

namespace pglake::physics {

using ad::square;  // scalar and graph-node overloads for the formulas below

// ---------------------------------------------------------------------------
// Water density
// ---------------------------------------------------------------------------

// Density has a pole at this temperature; nothing physical lives below it.
inline constexpr double kDensityPoleC = -68.12963;
inline constexpr double kDensityMaxC = 3.9863;  // temperature of maximum density

// Empirical freshwater density (kg/m^3) as a function of temperature (deg C).
// Written as a template so the same expression runs on doubles and on graph
// nodes; exact 1000.0 at the density maximum because the squared factor
// vanishes identically.
template <class V>
V water_density(const V& temp_c) {
  return 1000.0 *
         (1.0 - ((temp_c + 288.9414) * square(temp_c - 3.9863)) /
                    (508929.2 * (temp_c + 68.12963)));
}

// Nominal validity range of the fit; values outside are accepted, callers
// that care can flag them with density_in_validity_range.
inline bool density_in_validity_range(double temp_c) {
  return temp_c >= -0.5 && temp_c <= 40.0;
}

// Scalar entry point with pole rejection.
double density(double temp_c);

// ---------------------------------------------------------------------------
// Spatial discretization
// ---------------------------------------------------------------------------

// Depth grid with hypsography. Each depth is the center of one layer whose
// thickness is the local grid spacing (last layer reuses the spacing above
// it); layer volume = area * thickness.
struct DepthGrid {
  std::vector<double> depths_m;        // strictly increasing, surface first
  std::vector<double> layer_areas_m2;  // non-increasing with depth
  std::vector<double> layer_volumes_m3;

  DepthGrid() = default;
  DepthGrid(std::vector<double> depths, std::vector<double> areas);

  static DepthGrid uniform(double max_depth_m, double step_m, double surface_area_m2,
                           double area_taper);

  std::size_t size() const { return depths_m.size(); }
  double surface_area() const { return layer_areas_m2.front(); }
  double total_volume() const;
};

// Temperature predictions or truth on a fixed grid: values(t, d) in deg C.
struct TempField {
  ad::Tensor values;  // T x n_depths
  DepthGrid grid;
  std::vector<EpochDay> timestamps;

  TempField() = default;
  TempField(ad::Tensor v, DepthGrid g, std::vector<EpochDay> ts);

  std::size_t steps() const { return values.rows(); }
  std::size_t depths() const { return values.cols(); }
};

// ---------------------------------------------------------------------------
// Heat content
// ---------------------------------------------------------------------------

inline constexpr double kRhoRef = 1000.0;    // kg/m^3
inline constexpr double kCWater = 4186.0;    // J/(kg C)
inline constexpr double kSecondsPerDay = 86400.0;

double heat_content(const std::vector<double>& profile_c, const DepthGrid& grid);
double heat_content_row(const ad::Tensor& field, std::size_t row, const DepthGrid& grid);
double volume_avg_temp(const std::vector<double>& profile_c, const DepthGrid& grid);

// ---------------------------------------------------------------------------
// Surface energy flux
// ---------------------------------------------------------------------------

// Meteorology needed by the surface energy balance, one timestep.
struct MetRow {
  double shortwave_wm2 = 0.0;  // incoming shortwave, daily mean
  double longwave_wm2 = 0.0;   // incoming (downwelling) longwave
  double air_temp_c = 0.0;
  double wind_ms = 0.0;
  double rel_humidity = 0.0;  // 0..1
};

// Bulk-transfer surface balance. Sensible and latent fluxes use one exchange
// coefficient; the saturation vapor pressure curve is linearized so the whole
// balance is k0 - k1*Ts - eps*sigma*(Ts + 273.15)^4 with k0, k1 set by the
// drivers alone.
struct FluxParams {
  double albedo = 0.07;
  double emissivity = 0.97;
  double stefan_boltzmann = 5.670e-8;  // W/(m^2 K^4)
  double rho_air = 1.2;                // kg/m^3
  double cp_air = 1005.0;              // J/(kg C)
  double bulk_coeff = 1.3e-3;          // C_H = C_E
  double latent_heat = 2.5e6;          // J/kg
  double sat_vp_base = 611.0;          // Pa at 0 C
  double sat_vp_slope = 44.0;          // Pa/C, linearized Clausius-Clapeyron
  double pressure = 101325.0;          // Pa
  double moisture_ratio = 0.622;
};

struct FluxCoeffs {
  double k0 = 0.0;  // W/m^2
  double k1 = 0.0;  // W/(m^2 C)
};

FluxCoeffs flux_coeffs(const MetRow& met, const FluxParams& p);

template <class V>
V net_flux(const FluxCoeffs& c, const V& surface_temp_c, const FluxParams& p) {
  return c.k0 - c.k1 * surface_temp_c -
         (p.emissivity * p.stefan_boltzmann) * square(square(surface_temp_c + 273.15));
}

// Net surface flux in W/m^2, positive into the lake; differentiable in the
// surface temperature.
double net_surface_flux(const MetRow& met, double surface_temp_c,
                        const FluxParams& p = FluxParams{});

// ---------------------------------------------------------------------------
// Constraint penalties and diagnostics
// ---------------------------------------------------------------------------

// Mean hinge violation of the density-depth monotonicity over all adjacent
// depth pairs and dates: (1/(T*(m-1))) sum max(0, rho_d - rho_{d+1}).
double density_penalty(const TempField& field);
ad::Graph::NodeId density_penalty_node(ad::Graph& g, ad::Graph::NodeId pred_c);

// Fraction of adjacent-depth pairs over all dates whose density decreases
// with depth by more than the tolerance (kg/m^3). Evaluation only.
double phy_inconsistency(const TempField& field, double tolerance = 1e-6);

// Per-step bookkeeping of the surface energy budget.
struct EnergyLedger {
  std::vector<double> net_flux_wm2;    // T-1 entries, flux applied over step t
  std::vector<double> heat_joules;     // T entries
  std::vector<double> residual_joules; // T-1 entries
};

// Hinged energy-closure penalty with slack tau (J):
// (1/(T-1)) sum_t max(0, |H_{t+1} - H_t - phi_t * A * dt| - tau), with phi_t
// evaluated at the predicted surface temperature of step t.
double energy_penalty(const TempField& field, const std::vector<MetRow>& met, double tau_joules,
                      const FluxParams& p = FluxParams{});
ad::Graph::NodeId energy_penalty_node(ad::Graph& g, ad::Graph::NodeId pred_c,
                                      const std::vector<MetRow>& met, const DepthGrid& grid,
                                      double tau_joules, const FluxParams& p = FluxParams{},
                                      double step_days = 1.0);

// Depth of the maximum vertical temperature gradient: midpoint of the
// steepest adjacent pair, ties toward the surface. Profiles whose steepest
// gradient is below the cutoff count as unstratified.
inline constexpr double kThermoclineCutoffCPerM = 0.1;
std::optional<double> thermocline_depth(const std::vector<double>& profile_c,
                                        const DepthGrid& grid);

}  // namespace pglake::physics
