#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ad/graph.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "physics/physics.hpp"

using namespace pglake;
using namespace pglake::physics;

namespace {

// High-precision direct evaluation of the density expression.
long double density_oracle(long double y) {
  return 1000.0L *
         (1.0L - ((y + 288.9414L) * (y - 3.9863L) * (y - 3.9863L)) /
                     (508929.2L * (y + 68.12963L)));
}

DepthGrid flat_grid(std::size_t n, double spacing = 1.0) {
  std::vector<double> depths(n), areas(n, 1.0);
  for (std::size_t d = 0; d < n; ++d) depths[d] = spacing * static_cast<double>(d);
  return DepthGrid(depths, areas);
}

TempField make_field(const ad::Tensor& values, const DepthGrid& grid) {
  std::vector<EpochDay> ts(values.rows());
  const EpochDay start = make_epoch_day(2001, 1, 1);
  for (std::size_t t = 0; t < ts.size(); ++t) ts[t] = start + static_cast<EpochDay>(t);
  return TempField(values, grid, ts);
}

}  // namespace

TEST_CASE("density is exact at the density maximum") {
  CHECK(density(3.9863) == 1000.0);
}

TEST_CASE("density at 0 C matches the high-precision evaluation") {
  CHECK(density(0.0) == doctest::Approx(999.8675791619049).epsilon(1e-12));
}

TEST_CASE("density decreases above the maximum") {
  CHECK(density(4.0) > density(10.0));
  // frozen from the high-precision oracle
  CHECK(density(4.0) - density(10.0) == doctest::Approx(0.2718905121193382).epsilon(1e-9));
}

TEST_CASE("density matches the oracle at 1000 points to 1e-9 relative") {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double y = 35.0 * static_cast<double>(i) / 999.0;
    const double got = density(y);
    const double want = static_cast<double>(density_oracle(y));
    worst = std::max(worst, std::fabs(got - want) / std::fabs(want));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("density is monotone on both sides of the maximum") {
  for (double y = 0.0; y + 0.01 <= 3.9863; y += 0.01)
    CHECK(density(y) < density(std::min(y + 0.01, 3.9863)));
  for (double y = 3.9863; y + 0.01 <= 40.0; y += 0.01)
    CHECK(density(y) > density(y + 0.01));
}

TEST_CASE("density rejects the pole and non-finite input") {
  CHECK_THROWS_AS(density(-68.12963), NumericError);
  CHECK_THROWS_AS(density(-80.0), NumericError);
  CHECK_THROWS_AS(density(std::numeric_limits<double>::quiet_NaN()), NumericError);
  CHECK(density_in_validity_range(20.0));
  CHECK_FALSE(density_in_validity_range(45.0));
}

TEST_CASE("depth grid validation") {
  CHECK_THROWS_AS(DepthGrid({0.0, 1.0, 0.5}, {1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(DepthGrid({0.0, 1.0, 2.0}, {1.0, 2.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(DepthGrid({0.0, 1.0}, {1.0}), ShapeError);
  const DepthGrid g = DepthGrid::uniform(25.0, 1.0, 100.0, 0.2);
  CHECK(g.size() == 26);
  CHECK(g.layer_areas_m2.front() == 100.0);
  CHECK(g.layer_areas_m2.back() == doctest::Approx(20.0));
  CHECK(g.surface_area() == 100.0);
}

TEST_CASE("density_penalty is zero on isothermal and stratified fields") {
  const DepthGrid grid = flat_grid(5);
  CHECK(density_penalty(make_field(ad::Tensor::full(4, 5, 7.5), grid)) == 0.0);

  ad::Tensor stratified(3, 5);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t d = 0; d < 5; ++d)
      stratified(t, d) = 20.0 - 2.0 * static_cast<double>(d);  // warm over cold, all > 4 C
  CHECK(density_penalty(make_field(stratified, grid)) == 0.0);
}

TEST_CASE("density_penalty on one inverted two-depth pair") {
  const DepthGrid grid = flat_grid(2);
  ad::Tensor values(1, 2, {4.0, 10.0});  // denser water on top
  const double penalty = density_penalty(make_field(values, grid));
  CHECK(penalty == doctest::Approx(density(4.0) - density(10.0)).epsilon(1e-15));
  CHECK(penalty > 0.0);
}

TEST_CASE("density_penalty normalizes by dates and pairs") {
  const DepthGrid grid = flat_grid(3);
  ad::Tensor values(2, 3, {10.0, 12.0, 14.0,    // two violating pairs (cold under warm... no:
                           14.0, 12.0, 10.0});  // row 1 is stratified
  // row 0: 10 over 12 over 14 C -> density decreases downward at both pairs.
  const double expect =
      ((density(10.0) - density(12.0)) + (density(12.0) - density(14.0))) / 4.0;
  CHECK(density_penalty(make_field(values, grid)) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("density_penalty tape route matches the scalar route and is differentiable") {
  Rng rng(606);
  const DepthGrid grid = flat_grid(6);
  ad::Tensor values(4, 6);
  for (auto& v : values.data()) v = rng.uniform(2.0, 28.0);
  const double scalar_route = density_penalty(make_field(values, grid));

  ad::Graph g;
  const auto pred = g.parameter(values, "pred");
  const auto pen = density_penalty_node(g, pred);
  CHECK(g.value(pen).item() == doctest::Approx(scalar_route).epsilon(1e-12));
  CHECK(g.grad_check(pen, 1e-5) < 1e-5);
}

TEST_CASE("hinge and counter agree on the zero set") {
  Rng rng(707);
  const DepthGrid grid = flat_grid(4);
  for (int trial = 0; trial < 50; ++trial) {
    ad::Tensor values(3, 4);
    for (auto& v : values.data()) v = rng.uniform(1.0, 30.0);
    const TempField field = make_field(values, grid);
    CHECK((density_penalty(field) == 0.0) == (phy_inconsistency(field, 0.0) == 0.0));
  }
}

TEST_CASE("phy_inconsistency counts violating pairs as a fraction") {
  const DepthGrid grid = flat_grid(11);
  ad::Tensor values(5, 11);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t d = 0; d < 11; ++d) values(t, d) = 22.0 - static_cast<double>(d);
  CHECK(phy_inconsistency(make_field(values, grid)) == 0.0);

  values(2, 3) = 4.2;  // cold spike: its pair below (4.2 C over 18 C) violates
  CHECK(phy_inconsistency(make_field(values, grid)) == doctest::Approx(1.0 / 50.0));
}

TEST_CASE("heat content and volume-average temperature") {
  SUBCASE("isothermal mean is the temperature itself") {
    const DepthGrid grid = DepthGrid::uniform(10.0, 1.0, 50.0, 0.5);
    const std::vector<double> profile(grid.size(), 6.25);
    CHECK(volume_avg_temp(profile, grid) == doctest::Approx(6.25).epsilon(1e-15));
  }
  SUBCASE("two equal-volume layers at 2 and 6 average to 4") {
    const DepthGrid grid = flat_grid(2);
    CHECK(volume_avg_temp({2.0, 6.0}, grid) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("three-layer hand case") {
    const DepthGrid grid({0.0, 1.0, 2.0}, {3.0, 2.0, 1.0});  // volumes 3, 2, 1
    const std::vector<double> profile = {10.0, 4.0, 2.0};
    const double expect_heat = kRhoRef * kCWater * (3.0 * 10.0 + 2.0 * 4.0 + 1.0 * 2.0);
    CHECK(heat_content(profile, grid) == doctest::Approx(expect_heat).epsilon(1e-15));
    CHECK(volume_avg_temp(profile, grid) == doctest::Approx(40.0 / 6.0).epsilon(1e-15));
  }
  SUBCASE("length mismatch is rejected") {
    const DepthGrid grid = flat_grid(3);
    CHECK_THROWS_AS(heat_content({1.0, 2.0}, grid), ShapeError);
  }
}

TEST_CASE("net surface flux vanishes with zero drivers at absolute zero") {
  MetRow met;  // all zeros
  CHECK(net_surface_flux(met, -273.15) == 0.0);
}

TEST_CASE("net surface flux balances pure radiation") {
  const FluxParams p;
  MetRow met;
  const double ts = 12.0;
  met.longwave_wm2 = p.emissivity * p.stefan_boltzmann * std::pow(ts + 273.15, 4.0);
  CHECK(net_surface_flux(met, ts) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("net surface flux matches a term-by-term oracle") {
  Rng rng(2718);
  const FluxParams p;
  MetRow met;
  met.shortwave_wm2 = rng.uniform(0.0, 350.0);
  met.longwave_wm2 = rng.uniform(150.0, 420.0);
  met.air_temp_c = rng.uniform(-20.0, 30.0);
  met.wind_ms = rng.uniform(0.5, 12.0);
  met.rel_humidity = rng.uniform(0.3, 1.0);
  const double ts = rng.uniform(0.0, 30.0);

  const double sw_in = (1.0 - p.albedo) * met.shortwave_wm2;
  const double lw_out = p.emissivity * p.stefan_boltzmann * std::pow(ts + 273.15, 4.0);
  const double sensible =
      p.rho_air * p.cp_air * p.bulk_coeff * met.wind_ms * (ts - met.air_temp_c);
  const double e_sat_s = p.sat_vp_base + p.sat_vp_slope * ts;
  const double e_air = met.rel_humidity * (p.sat_vp_base + p.sat_vp_slope * met.air_temp_c);
  const double latent = p.rho_air * p.latent_heat * p.bulk_coeff * met.wind_ms *
                        p.moisture_ratio / p.pressure * (e_sat_s - e_air);
  const double want = sw_in + met.longwave_wm2 - lw_out - sensible - latent;
  CHECK(net_surface_flux(met, ts) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("net surface flux rejects non-finite drivers") {
  MetRow met;
  met.wind_ms = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(net_surface_flux(met, 5.0), NumericError);
}

TEST_CASE("energy_penalty basics") {
  const DepthGrid grid = flat_grid(3);

  SUBCASE("constant field with zero net flux is penalty-free") {
    const FluxParams p;
    const double ts = 8.0;
    MetRow met;
    met.longwave_wm2 = p.emissivity * p.stefan_boltzmann * std::pow(ts + 273.15, 4.0);
    const std::vector<MetRow> series(4, met);
    const TempField field = make_field(ad::Tensor::full(5, 3, ts), grid);
    CHECK(energy_penalty(field, series, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("infinite slack kills any penalty") {
    Rng rng(5150);
    ad::Tensor values(6, 3);
    for (auto& v : values.data()) v = rng.uniform(0.0, 30.0);
    const std::vector<MetRow> series(5);
    const TempField field = make_field(values, grid);
    CHECK(energy_penalty(field, series, 1e300) == 0.0);
  }

  SUBCASE("a one-step uniform bump is detected") {
    const FluxParams p;
    const double ts = 8.0;
    MetRow met;
    met.longwave_wm2 = p.emissivity * p.stefan_boltzmann * std::pow(ts + 273.15, 4.0);
    const std::vector<MetRow> series(5, met);
    ad::Tensor values = ad::Tensor::full(6, 3, ts);
    const double closed = energy_penalty(make_field(values, grid), series, 0.0);
    for (std::size_t d = 0; d < 3; ++d) values(3, d) += 1.0;
    const double bumped = energy_penalty(make_field(values, grid), series, 0.0);
    CHECK(closed == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bumped > 0.0);
  }

  SUBCASE("needs two timesteps and non-negative slack") {
    const TempField field = make_field(ad::Tensor::full(1, 3, 5.0), grid);
    CHECK_THROWS_AS(energy_penalty(field, {}, 0.0), ShapeError);
    const TempField ok = make_field(ad::Tensor::full(3, 3, 5.0), grid);
    CHECK_THROWS_AS(energy_penalty(ok, std::vector<MetRow>(2), -1.0), ConfigError);
  }
}

TEST_CASE("energy_penalty tape route matches the scalar route and is differentiable") {
  Rng rng(8088);
  const DepthGrid grid = DepthGrid::uniform(4.0, 1.0, 10.0, 0.5);
  ad::Tensor values(5, 5);
  for (auto& v : values.data()) v = rng.uniform(2.0, 25.0);
  std::vector<MetRow> met(4);
  for (auto& m : met) {
    m.shortwave_wm2 = rng.uniform(0.0, 300.0);
    m.longwave_wm2 = rng.uniform(200.0, 400.0);
    m.air_temp_c = rng.uniform(-10.0, 25.0);
    m.wind_ms = rng.uniform(0.5, 10.0);
    m.rel_humidity = rng.uniform(0.3, 1.0);
  }
  const TempField field = make_field(values, grid);
  const double tau = 1e5;
  const double scalar_route = energy_penalty(field, met, tau);

  ad::Graph g;
  const auto pred = g.parameter(values, "pred");
  const auto pen = energy_penalty_node(g, pred, met, grid, tau);
  CHECK(g.value(pen).item() == doctest::Approx(scalar_route).epsilon(1e-12));
  // Joule-scale output; normalize so the finite-difference check is scale-free.
  const auto scaled = g.scale(pen, 1.0 / (std::fabs(scalar_route) + 1e-6));
  CHECK(g.grad_check(scaled, 1e-5) < 1e-4);
}

TEST_CASE("thermocline detection") {
  SUBCASE("isothermal profiles have none") {
    const DepthGrid grid = flat_grid(10);
    CHECK_FALSE(thermocline_depth(std::vector<double>(10, 7.0), grid).has_value());
  }
  SUBCASE("a single jump between 8 and 10 m lands at 9") {
    std::vector<double> depths, areas;
    for (double z = 0.0; z <= 24.0; z += 2.0) {
      depths.push_back(z);
      areas.push_back(1.0);
    }
    const DepthGrid grid(depths, areas);
    std::vector<double> profile(grid.size(), 20.0);
    for (std::size_t d = 0; d < grid.size(); ++d)
      if (grid.depths_m[d] >= 10.0) profile[d] = 15.0;
    const auto z = thermocline_depth(profile, grid);
    REQUIRE(z.has_value());
    CHECK(*z == 9.0);
  }
  SUBCASE("a linear profile breaks ties toward the surface") {
    const DepthGrid grid = flat_grid(6);
    std::vector<double> profile;
    for (std::size_t d = 0; d < 6; ++d) profile.push_back(20.0 - 0.5 * static_cast<double>(d));
    const auto z = thermocline_depth(profile, grid);
    REQUIRE(z.has_value());
    CHECK(*z == 0.5);
  }
  SUBCASE("gradients below the cutoff mean unstratified") {
    const DepthGrid grid = flat_grid(6);
    std::vector<double> profile;
    for (std::size_t d = 0; d < 6; ++d) profile.push_back(20.0 - 0.05 * static_cast<double>(d));
    CHECK_FALSE(thermocline_depth(profile, grid).has_value());
  }
  SUBCASE("invariant to uniform offsets") {
    Rng rng(1999);
    const DepthGrid grid = flat_grid(8);
    std::vector<double> profile;
    for (std::size_t d = 0; d < 8; ++d) profile.push_back(rng.uniform(4.0, 25.0));
    auto base = thermocline_depth(profile, grid);
    for (auto& v : profile) v += 3.5;
    auto shifted = thermocline_depth(profile, grid);
    CHECK(base == shifted);
  }
}
