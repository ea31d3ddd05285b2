#include "sim/lakesim.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace pglake::sim {

using physics::DepthGrid;
using physics::EnergyLedger;
using physics::FluxParams;
using physics::MetRow;
using physics::TempField;

const char* const kDriverNames[kDriverCount] = {
    "shortwave_wm2", "longwave_wm2",  "air_temp_c",    "wind_ms",
    "rel_humidity",  "rain_mm",       "snow_flag",     "annual_sin",
    "annual_cos",    "semiannual_sin", "semiannual_cos"};

MetRow DriverSeries::met_row(std::size_t t) const {
  MetRow m;
  m.shortwave_wm2 = values(t, kShortwave);
  m.longwave_wm2 = values(t, kLongwave);
  m.air_temp_c = values(t, kAirTemp);
  m.wind_ms = values(t, kWindSpeed);
  m.rel_humidity = values(t, kRelHumidity);
  return m;
}

std::vector<MetRow> DriverSeries::met_rows() const {
  std::vector<MetRow> rows(steps());
  for (std::size_t t = 0; t < steps(); ++t) rows[t] = met_row(t);
  return rows;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kYearDays = 365.25;
constexpr double kArCoeff = 0.8;

struct ColumnSpec {
  double mean;
  double amplitude;
  double peak_doy;  // day of year at the seasonal maximum
  double sigma;     // stationary AR(1) standard deviation
  double lo;
  double hi;
};

// Documented physical ranges of the noisy columns.
constexpr ColumnSpec kShortwaveSpec{170.0, 130.0, 172.0, 35.0, 0.0, 350.0};
constexpr ColumnSpec kLongwaveSpec{310.0, 55.0, 200.0, 22.0, 150.0, 420.0};
constexpr ColumnSpec kAirTempSpec{8.0, 15.0, 205.0, 3.5, -30.0, 38.0};
constexpr ColumnSpec kWindSpec{4.5, 1.0, 20.0, 1.4, 0.5, 15.0};
constexpr ColumnSpec kHumiditySpec{0.72, 0.08, 20.0, 0.06, 0.25, 1.0};
constexpr ColumnSpec kRainSpec{2.0, 1.5, 190.0, 2.4, 0.0, 80.0};

double seasonal(const ColumnSpec& s, int doy) {
  return s.mean + s.amplitude * std::cos(kTwoPi * (doy - s.peak_doy) / kYearDays);
}

}  // namespace

DriverSeries generate_drivers(std::size_t days, std::uint64_t seed, EpochDay start) {
  if (days < 2) throw ConfigError("driver series needs at least two days");
  Rng rng(seed);
  DriverSeries out;
  out.values = ad::Tensor(days, kDriverCount);
  out.timestamps.resize(days);

  const ColumnSpec specs[6] = {kShortwaveSpec, kLongwaveSpec, kAirTempSpec,
                               kWindSpec,      kHumiditySpec, kRainSpec};
  double ar[6];
  for (int c = 0; c < 6; ++c) ar[c] = rng.normal(0.0, specs[c].sigma);
  const double innovation = std::sqrt(1.0 - kArCoeff * kArCoeff);

  for (std::size_t t = 0; t < days; ++t) {
    const EpochDay day = start + static_cast<EpochDay>(t);
    out.timestamps[t] = day;
    const int doy = day_of_year(day);
    for (int c = 0; c < 6; ++c) {
      ar[c] = kArCoeff * ar[c] + innovation * rng.normal(0.0, specs[c].sigma);
      const double v = seasonal(specs[c], doy) + ar[c];
      out.values(t, c) = std::clamp(v, specs[c].lo, specs[c].hi);
    }
    const bool freezing = out.values(t, kAirTemp) < 0.0;
    const bool precip = out.values(t, kRain) > 0.5;
    out.values(t, kSnowFlag) = freezing && precip ? 1.0 : 0.0;
    const double phase = kTwoPi * doy / kYearDays;
    out.values(t, kAnnualSin) = std::sin(phase);
    out.values(t, kAnnualCos) = std::cos(phase);
    out.values(t, kSemiannualSin) = std::sin(2.0 * phase);
    out.values(t, kSemiannualCos) = std::cos(2.0 * phase);
  }
  return out;
}

SimConfig SimConfig::defaults() {
  SimConfig c;
  c.grid = DepthGrid::uniform(25.0, 1.0, 1.0e6, 0.2);
  return c;
}

namespace {

// Downward sweep with a stack of mixed blocks: a statically unstable layer
// merges into the block above it (volume-weighted), and the merged block is
// re-checked against its new upper neighbor. One pass, at most m-1 merges,
// heat conserved exactly up to rounding.
void convective_mix(std::vector<double>& y, const DepthGrid& grid) {
  const std::size_t m = y.size();
  struct Block {
    double volume;
    double heat;  // volume-weighted temperature sum
    std::size_t layers;
    double temp() const { return heat / volume; }
  };
  std::vector<Block> blocks;
  blocks.reserve(m);
  for (std::size_t d = 0; d < m; ++d) {
    Block cur{grid.layer_volumes_m3[d], grid.layer_volumes_m3[d] * y[d], 1};
    while (!blocks.empty() &&
           physics::density(blocks.back().temp()) > physics::density(cur.temp())) {
      cur.volume += blocks.back().volume;
      cur.heat += blocks.back().heat;
      cur.layers += blocks.back().layers;
      blocks.pop_back();
    }
    blocks.push_back(cur);
  }
  std::size_t d = 0;
  for (const Block& b : blocks) {
    const double temp = b.temp();
    for (std::size_t i = 0; i < b.layers; ++i) y[d++] = temp;
  }
}

SimResult simulate_impl(const SimConfig& config, const DriverSeries& drivers,
                        const Perturbation& pert) {
  for (double f : {pert.diffusivity, pert.albedo, pert.bulk})
    if (!(f >= 0.25 && f <= 4.0))
      throw ConfigError("perturbation factors must lie in [0.25, 4]");
  const DepthGrid& grid = config.grid;
  const std::size_t m = grid.size();
  const std::size_t steps = drivers.steps();
  if (steps < 2) throw ConfigError("simulation needs at least two days of drivers");
  if (!(config.diffusivity_m2_s > 0.0)) throw ConfigError("diffusivity must be positive");
  if (!drivers.values.all_finite()) throw NumericError("drivers contain non-finite values");

  FluxParams flux = config.flux;
  flux.albedo *= pert.albedo;
  flux.bulk_coeff *= pert.bulk;
  const double diffusivity = config.diffusivity_m2_s * pert.diffusivity;

  // Substep count from the sharpest interface exchange rate, margin 0.25.
  double max_rate = 0.0;
  for (std::size_t d = 0; d + 1 < m; ++d) {
    const double dz = grid.depths_m[d + 1] - grid.depths_m[d];
    const double a_int = grid.layer_areas_m2[d + 1];
    const double v_min = std::min(grid.layer_volumes_m3[d], grid.layer_volumes_m3[d + 1]);
    max_rate = std::max(max_rate, diffusivity * a_int / (dz * v_min));
  }
  const std::size_t substeps =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(max_rate * physics::kSecondsPerDay / 0.25)));
  const double dt_sub = physics::kSecondsPerDay / static_cast<double>(substeps);

  SimResult result;
  ad::Tensor field_values(steps, m);
  result.ledger.heat_joules.resize(steps);
  result.ledger.net_flux_wm2.resize(steps - 1);
  result.ledger.residual_joules.resize(steps - 1);

  const double area = grid.surface_area();
  std::vector<double> y(m, config.initial_temp_c);
  std::vector<double> flux_between(m - 1);

  // Shortwave is absorbed over depth (Beer's law on the layer depths); every
  // other balance term acts on the surface layer. The shares sum to one, so
  // the column still receives exactly phi * area * dt.
  std::vector<double> sw_share(m);
  {
    double norm = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      sw_share[d] = std::exp(-config.light_extinction_per_m * grid.depths_m[d]);
      norm += sw_share[d];
    }
    for (std::size_t d = 0; d < m; ++d) sw_share[d] /= norm;
  }

  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t d = 0; d < m; ++d) field_values(t, d) = y[d];
    result.ledger.heat_joules[t] = physics::heat_content(y, grid);
    if (t + 1 == steps) break;

    const double phi = physics::net_surface_flux(drivers.met_row(t), y[0], flux);
    result.ledger.net_flux_wm2[t] = phi;
    const double sw_abs = (1.0 - flux.albedo) * drivers.met_row(t).shortwave_wm2;
    const double to_heat =
        area * physics::kSecondsPerDay / (physics::kRhoRef * physics::kCWater);
    y[0] += (phi - sw_abs) * to_heat / grid.layer_volumes_m3[0];
    for (std::size_t d = 0; d < m; ++d)
      y[d] += sw_abs * sw_share[d] * to_heat / grid.layer_volumes_m3[d];

    for (std::size_t s = 0; s < substeps; ++s) {
      for (std::size_t d = 0; d + 1 < m; ++d) {
        const double dz = grid.depths_m[d + 1] - grid.depths_m[d];
        const double a_int = grid.layer_areas_m2[d + 1];
        flux_between[d] = diffusivity * a_int * (y[d + 1] - y[d]) / dz * dt_sub;
      }
      for (std::size_t d = 0; d + 1 < m; ++d) {
        y[d] += flux_between[d] / grid.layer_volumes_m3[d];
        y[d + 1] -= flux_between[d] / grid.layer_volumes_m3[d + 1];
      }
    }

    convective_mix(y, grid);

    for (double v : y)
      if (!std::isfinite(v) || std::fabs(v) > 100.0)
        throw NumericError("diffusion instability at simulation step " + std::to_string(t));
  }

  const double area_dt = area * physics::kSecondsPerDay;
  for (std::size_t t = 0; t + 1 < steps; ++t)
    result.ledger.residual_joules[t] = result.ledger.heat_joules[t + 1] -
                                       result.ledger.heat_joules[t] -
                                       result.ledger.net_flux_wm2[t] * area_dt;

  result.field = TempField(std::move(field_values), grid, drivers.timestamps);
  return result;
}

}  // namespace

SimResult simulate(const SimConfig& config, const DriverSeries& drivers) {
  return simulate_impl(config, drivers, Perturbation{});
}

TempField run_phy(const SimConfig& config, const DriverSeries& drivers) {
  return simulate_impl(config, drivers, config.perturbation).field;
}

ObservationSet sample_observations(const TempField& truth, double missing_rate,
                                   double noise_sigma, std::uint64_t seed) {
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
    throw ConfigError("missing_rate must lie in [0, 1]");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  Rng rng(seed);
  ObservationSet obs;
  obs.steps = truth.steps();
  obs.depths = truth.depths();
  obs.noise_sigma = noise_sigma;
  obs.mask.assign(obs.steps * obs.depths, 0);
  for (std::size_t t = 0; t < obs.steps; ++t)
    for (std::size_t d = 0; d < obs.depths; ++d) {
      if (rng.uniform01() < missing_rate) continue;
      obs.mask[t * obs.depths + d] = 1;
      const double noise = noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0;
      obs.entries.push_back({t, d, truth.values(t, d) + noise});
    }
  return obs;
}

ObservationSet sample_scalar_observations(const std::vector<double>& truth, double missing_rate,
                                          double noise_sigma, std::uint64_t seed) {
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
    throw ConfigError("missing_rate must lie in [0, 1]");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  Rng rng(seed);
  ObservationSet obs;
  obs.steps = truth.size();
  obs.depths = 1;
  obs.noise_sigma = noise_sigma;
  obs.mask.assign(obs.steps, 0);
  for (std::size_t t = 0; t < obs.steps; ++t) {
    if (rng.uniform01() < missing_rate) continue;
    obs.mask[t] = 1;
    const double noise = noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0;
    obs.entries.push_back({t, 0, truth[t] + noise});
  }
  return obs;
}

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

}  // namespace

std::vector<double> scalar_series(const DriverSeries& drivers, const ScalarCoeffs& c,
                                  const std::vector<double>& noise) {
  const std::size_t steps = drivers.steps();
  if (!noise.empty() && noise.size() != steps)
    throw ShapeError("scalar_series: noise length does not match drivers");
  std::vector<double> out(steps);
  double rain_ema = drivers.values(0, kRain);
  double temp_ema = drivers.values(0, kAirTemp);
  for (std::size_t t = 0; t < steps; ++t) {
    rain_ema = 0.9 * rain_ema + 0.1 * drivers.values(t, kRain);
    temp_ema = 0.95 * temp_ema + 0.05 * drivers.values(t, kAirTemp);
    const int doy = day_of_year(drivers.timestamps[t]);
    const double season = std::sin(kTwoPi * (doy - 120.0) / kYearDays);
    const double latent = c.base + c.rain * rain_ema + c.temp * temp_ema + c.season * season +
                          c.trend * (static_cast<double>(t) / 3652.5) +
                          (noise.empty() ? 0.0 : noise[t]);
    out[t] = 0.03 * softplus(latent);
  }
  return out;
}

ScalarTarget generate_scalar_target(const DriverSeries& drivers, std::uint64_t seed) {
  if (drivers.steps() < 365)
    throw ConfigError("scalar target needs at least a year of drivers");
  Rng rng(seed);
  const std::size_t steps = drivers.steps();
  std::vector<double> noise(steps);
  double ar = rng.normal(0.0, 0.12);
  const double innovation = std::sqrt(1.0 - 0.9 * 0.9);
  for (std::size_t t = 0; t < steps; ++t) {
    ar = 0.9 * ar + innovation * rng.normal(0.0, 0.12);
    noise[t] = ar;
  }

  // Truth responds to smoothed rain, smoothed air temperature, season and a
  // slow positive trend; the imperfect model mis-weights the drivers and
  // misses the trend.
  const ScalarCoeffs truth_c{-0.4, 0.16, 0.025, 0.3, 0.5};
  const ScalarCoeffs phy_c{-0.25, 0.10, 0.038, 0.24, 0.0};

  ScalarTarget target;
  target.truth = scalar_series(drivers, truth_c, noise);
  target.phy = scalar_series(drivers, phy_c, noise);
  return target;
}

}  // namespace pglake::sim
