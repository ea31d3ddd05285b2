#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ad/tensor.hpp"
#include "common/dates.hpp"
#include "physics/physics.hpp"

namespace pglake::sim {

// ---------------------------------------------------------------------------
// Meteorological drivers
// ---------------------------------------------------------------------------

// Column layout of the driver matrix. The four seasonal covariates are
// deterministic annual/semiannual harmonics; the snow flag is 1 on freezing
// days with precipitation.
enum DriverColumn : std::size_t {
  kShortwave = 0,
  kLongwave = 1,
  kAirTemp = 2,
  kWindSpeed = 3,
  kRelHumidity = 4,
  kRain = 5,
  kSnowFlag = 6,
  kAnnualSin = 7,
  kAnnualCos = 8,
  kSemiannualSin = 9,
  kSemiannualCos = 10,
  kDriverCount = 11,
};

extern const char* const kDriverNames[kDriverCount];

struct DriverSeries {
  ad::Tensor values;  // T x 11
  std::vector<EpochDay> timestamps;

  std::size_t steps() const { return values.rows(); }
  physics::MetRow met_row(std::size_t t) const;
  std::vector<physics::MetRow> met_rows() const;
};

// Sinusoidal annual cycles plus AR(1) noise (coefficient 0.8, stationary
// standard deviation as documented per column), clamped to physical ranges.
DriverSeries generate_drivers(std::size_t days, std::uint64_t seed,
                              EpochDay start = make_epoch_day(2000, 1, 1));

// ---------------------------------------------------------------------------
// Thermal simulator
// ---------------------------------------------------------------------------

// Multiplicative perturbations that turn the simulator into the imperfect
// physics model: applied to eddy diffusivity, albedo and the bulk transfer
// coefficient. Identity factors reproduce the truth run exactly.
struct Perturbation {
  double diffusivity = 1.0;
  double albedo = 1.0;
  double bulk = 1.0;
};

struct SimConfig {
  physics::DepthGrid grid;
  double diffusivity_m2_s = 1e-5;     // baseline eddy diffusivity
  double light_extinction_per_m = 0.5;  // Beer-law shortwave attenuation
  physics::FluxParams flux;           // surface balance constants
  Perturbation perturbation;          // used by run_phy
  double initial_temp_c = 4.0;

  static SimConfig defaults();
};

struct SimResult {
  physics::TempField field;
  physics::EnergyLedger ledger;
};

// One day per step: surface flux into the top layer, explicit diffusion with
// stability-limited substeps, then convective adjustment by merging adjacent
// layers to their volume-weighted mean until the column is statically
// stable. The ledger closes to rounding error by construction.
SimResult simulate(const SimConfig& config, const DriverSeries& drivers);

// The PHY role: simulate with the perturbation factors applied.
physics::TempField run_phy(const SimConfig& config, const DriverSeries& drivers);

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

struct Observation {
  std::size_t t;
  std::size_t depth;
  double value_c;
};

struct ObservationSet {
  std::vector<Observation> entries;
  std::vector<std::uint8_t> mask;  // T x n_depths, row-major
  std::size_t steps = 0;
  std::size_t depths = 0;
  double noise_sigma = 0.0;

  bool observed(std::size_t t, std::size_t d) const { return mask[t * depths + d] != 0; }
};

// Keeps each cell independently with probability 1 - missing_rate and adds
// i.i.d. Gaussian noise to kept values.
ObservationSet sample_observations(const physics::TempField& truth, double missing_rate,
                                   double noise_sigma, std::uint64_t seed);

// Same sampling for a scalar series (one column).
ObservationSet sample_scalar_observations(const std::vector<double>& truth, double missing_rate,
                                          double noise_sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scalar seasonal target (the water-quality analogue)
// ---------------------------------------------------------------------------

struct ScalarTarget {
  std::vector<double> truth;
  std::vector<double> phy;  // same generator, perturbed coefficients
};

// Response coefficients of the scalar generator.
struct ScalarCoeffs {
  double base;
  double rain;    // on exponentially smoothed rain
  double temp;    // on exponentially smoothed air temperature
  double season;  // on the annual harmonic
  double trend;   // per decade
};

// Non-negative (softplus-shaped) concentration series from the drivers, the
// coefficients and an additive latent noise series (may be empty).
std::vector<double> scalar_series(const DriverSeries& drivers, const ScalarCoeffs& coeffs,
                                  const std::vector<double>& noise);

// Seasonal concentration series driven by smoothed rain and air temperature
// with a slow decadal trend. Truth and phy share the same latent noise; phy
// mis-weights the drivers and misses the trend entirely.
ScalarTarget generate_scalar_target(const DriverSeries& drivers, std::uint64_t seed);

}  // namespace pglake::sim
