#include "cmd/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "common/errors.hpp"
#include "io/csv.hpp"
#include "nn/model.hpp"
#include "train/trainer.hpp"

namespace pglake::cmd {

namespace fs = std::filesystem;

namespace {

// Sub-streams of the experiment seed, one per generated artifact.
constexpr std::uint64_t kScalarSeedOffset = 1;
constexpr std::uint64_t kObsSeedOffset = 2;
constexpr std::uint64_t kScalarObsSeedOffset = 3;

std::string out_path(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

std::string ensure_out_dir(const io::ExperimentConfig& config) {
  const std::string dir = io::resolve_out_dir(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

physics::DepthGrid config_grid(const io::ExperimentConfig& config) {
  return physics::DepthGrid::uniform(config.sim.max_depth_m, config.sim.depth_step_m,
                                     config.sim.surface_area_m2, config.sim.area_taper);
}

sim::SimConfig config_sim(const io::ExperimentConfig& config) {
  sim::SimConfig sc;
  sc.grid = config_grid(config);
  sc.diffusivity_m2_s = config.sim.diffusivity_m2_s;
  sc.perturbation = {config.sim.perturb_diffusivity, config.sim.perturb_albedo,
                     config.sim.perturb_bulk};
  return sc;
}

train::LossConfig config_loss(const io::ExperimentConfig& config) {
  train::LossConfig lc;
  lc.lambda_dp = config.loss.lambda_dp;
  lc.lambda_ec = config.loss.lambda_ec;
  lc.w_obs = config.loss.w_obs;
  lc.w_phy = config.loss.w_phy;
  if (config.loss.tau >= 0.0) lc.tau_joules = config.loss.tau;
  return lc;
}

train::TrainHyper config_hyper(const io::ExperimentConfig& config) {
  train::TrainHyper h;
  h.hidden = static_cast<std::size_t>(config.model.hidden);
  h.window = static_cast<std::size_t>(config.model.window);
  h.epochs = static_cast<std::size_t>(config.train.epochs);
  h.batch_windows = static_cast<std::size_t>(config.train.batch);
  h.adam.rate = config.train.rate;
  h.val_fraction = config.train.val_fraction;
  return h;
}

sim::DriverSeries load_drivers(const io::ExperimentConfig& config, const std::string& dir) {
  sim::DriverSeries drivers = io::read_drivers_csv(out_path(dir, "drivers.csv"));
  if (drivers.steps() != config.days_total())
    throw ShapeError("drivers.csv has " + std::to_string(drivers.steps()) + " rows, config says " +
                     std::to_string(config.days_total()));
  if (drivers.timestamps.front() != config.start_day())
    throw ShapeError("drivers.csv starts at " + format_iso_date(drivers.timestamps.front()) +
                     ", config says " + config.sim.start_date);
  return drivers;
}

physics::TempField load_field(const std::string& path, const physics::DepthGrid& grid,
                              const std::vector<EpochDay>& timestamps) {
  io::FieldCsv csv = io::read_field_csv(path);
  if (csv.depths_m.size() != grid.size())
    throw ShapeError("'" + path + "' has " + std::to_string(csv.depths_m.size()) +
                     " depth columns, grid has " + std::to_string(grid.size()));
  for (std::size_t d = 0; d < grid.size(); ++d)
    if (std::fabs(csv.depths_m[d] - grid.depths_m[d]) > 1e-6)
      throw ShapeError("'" + path + "' depth " + io::format_double(csv.depths_m[d]) +
                       " does not match the configured grid");
  if (csv.timestamps != timestamps)
    throw ShapeError("'" + path + "' timestamps do not match drivers.csv");
  return physics::TempField(std::move(csv.values), grid, std::move(csv.timestamps));
}

struct ScalarProblem {
  std::vector<double> truth;
  std::vector<double> phy;
  sim::ObservationSet obs;
};

ScalarProblem load_scalar_problem(const io::ExperimentConfig& config, const std::string& dir,
                                  const sim::DriverSeries& drivers) {
  ScalarProblem p;
  const io::ScalarCsv truth = io::read_scalar_csv(out_path(dir, "scalar_truth.csv"));
  const io::ScalarCsv phy = io::read_scalar_csv(out_path(dir, "scalar_phy.csv"));
  if (truth.timestamps != drivers.timestamps || phy.timestamps != drivers.timestamps)
    throw ShapeError("scalar series timestamps do not match drivers.csv");
  p.truth = truth.values;
  p.phy = phy.values;
  // Scalar observations are sampled on the fly; the sampling is part of the
  // experiment config rather than a generated file.
  p.obs = sim::sample_scalar_observations(p.truth, config.sim.scalar_missing_rate,
                                          config.sim.scalar_noise_sigma,
                                          config.sim.seed + kScalarObsSeedOffset);
  return p;
}

void write_history_csv(const std::string& path, const std::vector<train::HistoryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch,train_loss,val_rmse\n";
  for (const auto& r : rows)
    out << r.epoch << ',' << io::format_double(r.train_loss) << ','
        << io::format_double(r.val_rmse) << '\n';
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_metrics_csv(const std::string& path, const std::string& variant,
                       const train::Metrics& m, std::uint64_t seed) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  auto cell = [](const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string();
  };
  out << "variant,rmse_overall,rmse_winter,rmse_summer,phy_inconsistency,seed\n";
  out << variant << ',' << cell(m.rmse_overall) << ',' << cell(m.rmse_winter) << ','
      << cell(m.rmse_summer) << ',' << cell(m.phy_inconsistency) << ',' << seed << '\n';
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void cmd_gen(const io::ExperimentConfig& config) {
  const std::string dir = ensure_out_dir(config);
  const sim::DriverSeries drivers =
      sim::generate_drivers(config.days_total(), config.sim.seed, config.start_day());
  const sim::SimConfig sc = config_sim(config);
  const sim::SimResult truth = sim::simulate(sc, drivers);
  const physics::TempField phy = sim::run_phy(sc, drivers);
  const sim::ObservationSet obs =
      sim::sample_observations(truth.field, config.sim.missing_rate, config.sim.noise_sigma_c,
                               config.sim.seed + kObsSeedOffset);
  const sim::ScalarTarget scalar =
      sim::generate_scalar_target(drivers, config.sim.seed + kScalarSeedOffset);

  io::write_drivers_csv(out_path(dir, "drivers.csv"), drivers);
  io::write_field_csv(out_path(dir, "truth.csv"), truth.field.values, drivers.timestamps,
                      sc.grid.depths_m);
  io::write_field_csv(out_path(dir, "phy.csv"), phy.values, drivers.timestamps,
                      sc.grid.depths_m);
  io::write_obs_csv(out_path(dir, "obs.csv"), obs, drivers.timestamps, sc.grid.depths_m);
  io::write_scalar_csv(out_path(dir, "scalar_truth.csv"), scalar.truth, drivers.timestamps);
  io::write_scalar_csv(out_path(dir, "scalar_phy.csv"), scalar.phy, drivers.timestamps);
}

void cmd_train(const io::ExperimentConfig& config) {
  const std::string dir = ensure_out_dir(config);
  const nn::Variant variant = nn::parse_variant(config.model.variant);
  if (variant == nn::Variant::kPhy)
    throw ConfigError("the phy variant has nothing to train; use the eval command");

  const sim::DriverSeries drivers = load_drivers(config, dir);
  const std::size_t train_end = config.days_train();
  const train::LossConfig loss_cfg = config_loss(config);
  const train::TrainHyper hyper = config_hyper(config);

  train::LossWeights lw;
  train::Dataset ds;
  std::optional<physics::TempField> phy;
  sim::ObservationSet obs;
  ScalarProblem scalar;

  if (config.model.target == "temperature") {
    const physics::DepthGrid grid = config_grid(config);
    const bool needs_phy =
        nn::variant_uses_hpd(variant) || variant == nn::Variant::kPgrnn;
    if (needs_phy) phy = load_field(out_path(dir, "phy.csv"), grid, drivers.timestamps);
    obs = io::read_obs_csv(out_path(dir, "obs.csv"), drivers.timestamps, grid.depths_m);
    ds = train::prepare_field_dataset(variant, drivers, phy ? &*phy : nullptr, obs, grid,
                                      loss_cfg, train_end, lw);
  } else {
    scalar = load_scalar_problem(config, dir, drivers);
    ds = train::prepare_scalar_dataset(variant, drivers, scalar.phy, scalar.obs, loss_cfg,
                                       train_end, lw);
  }

  const train::TrainResult result =
      train::train_model(variant, ds, lw, hyper, config.train.seed);
  nn::save_checkpoint(result.model, out_path(dir, "model.ckpt"));
  write_history_csv(out_path(dir, "history.csv"), result.history);
}

void cmd_eval(const io::ExperimentConfig& config) {
  const std::string dir = ensure_out_dir(config);
  const nn::Variant variant = nn::parse_variant(config.model.variant);
  const sim::DriverSeries drivers = load_drivers(config, dir);
  const std::size_t train_end = config.days_train();
  const std::size_t total = drivers.steps();

  ad::Tensor pred;
  train::Metrics metrics;

  if (config.model.target == "temperature") {
    const physics::DepthGrid grid = config_grid(config);
    const sim::ObservationSet obs =
        io::read_obs_csv(out_path(dir, "obs.csv"), drivers.timestamps, grid.depths_m);

    if (variant == nn::Variant::kPhy) {
      const physics::TempField phy =
          load_field(out_path(dir, "phy.csv"), grid, drivers.timestamps);
      pred = ad::Tensor(total - train_end, grid.size());
      for (std::size_t t = train_end; t < total; ++t)
        for (std::size_t d = 0; d < grid.size(); ++d)
          pred(t - train_end, d) = phy.values(t, d);
    } else {
      nn::Model model = nn::load_checkpoint(out_path(dir, "model.ckpt"));
      if (model.variant != variant)
        throw ConfigError(std::string("model.ckpt holds variant '") +
                          nn::variant_name(model.variant) + "', config says '" +
                          config.model.variant + "'");
      std::optional<physics::TempField> phy;
      train::LossWeights lw;
      const train::LossConfig loss_cfg = config_loss(config);
      if (nn::variant_uses_hpd(variant))
        phy = load_field(out_path(dir, "phy.csv"), grid, drivers.timestamps);
      const train::Dataset ds = train::prepare_field_dataset(
          variant, drivers, phy ? &*phy : nullptr, obs, grid, loss_cfg, train_end, lw);
      pred = train::predict_span(model, ds, train_end, total);
    }
    metrics = train::evaluate(pred, train_end, obs, drivers.timestamps, &grid);
    io::write_field_csv(out_path(dir, "pred.csv"), pred,
                        {drivers.timestamps.begin() + static_cast<std::ptrdiff_t>(train_end),
                         drivers.timestamps.end()},
                        grid.depths_m);
  } else {
    const ScalarProblem scalar = load_scalar_problem(config, dir, drivers);
    if (variant == nn::Variant::kPhy) {
      pred = ad::Tensor(total - train_end, 1);
      for (std::size_t t = train_end; t < total; ++t) pred(t - train_end, 0) = scalar.phy[t];
    } else {
      nn::Model model = nn::load_checkpoint(out_path(dir, "model.ckpt"));
      if (model.variant != variant)
        throw ConfigError(std::string("model.ckpt holds variant '") +
                          nn::variant_name(model.variant) + "', config says '" +
                          config.model.variant + "'");
      train::LossWeights lw;
      const train::Dataset ds =
          train::prepare_scalar_dataset(variant, drivers, scalar.phy, scalar.obs,
                                        config_loss(config), train_end, lw);
      pred = train::predict_span(model, ds, train_end, total);
    }
    metrics = train::evaluate(pred, train_end, scalar.obs, drivers.timestamps, nullptr);
    std::vector<double> column(pred.rows());
    for (std::size_t t = 0; t < pred.rows(); ++t) column[t] = pred(t, 0);
    io::write_scalar_csv(out_path(dir, "pred.csv"), column,
                         {drivers.timestamps.begin() + static_cast<std::ptrdiff_t>(train_end),
                          drivers.timestamps.end()});
  }

  write_metrics_csv(out_path(dir, "metrics.csv"), config.model.variant, metrics,
                    config.train.seed);
}

void cmd_thermocline(const io::ExperimentConfig& config) {
  const std::string dir = ensure_out_dir(config);
  const std::string field_path = config.io.field.front() == '/'
                                     ? config.io.field
                                     : out_path(dir, config.io.field);
  const io::FieldCsv field = io::read_field_csv(field_path);
  if (field.depths_m.size() < 2)
    throw ShapeError("'" + field_path + "' needs at least two depth columns");

  // Only the depth coordinates matter here; hypsography is irrelevant.
  const physics::DepthGrid grid(field.depths_m,
                                std::vector<double>(field.depths_m.size(), 1.0));

  const std::string out_file = out_path(dir, "thermocline.csv");
  std::ofstream out(out_file, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + out_file + "' for writing");
  out << "timestamp,depth_m\n";

  std::vector<double> profile(field.depths_m.size());
  std::optional<double> prev;
  double jump_sum = 0.0;
  std::size_t jump_count = 0;
  for (std::size_t t = 0; t < field.values.rows(); ++t) {
    for (std::size_t d = 0; d < profile.size(); ++d) profile[d] = field.values(t, d);
    const std::optional<double> z = physics::thermocline_depth(profile, grid);
    out << format_iso_date(field.timestamps[t]) << ','
        << (z ? io::format_double(*z) : std::string()) << '\n';
    if (z && prev) {
      jump_sum += std::fabs(*z - *prev);
      ++jump_count;
    }
    prev = z;
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + out_file + "'");

  const double smoothness = jump_count > 0 ? jump_sum / static_cast<double>(jump_count) : 0.0;
  std::printf("thermocline_smoothness_m_per_day=%s\n", io::format_double(smoothness).c_str());
}

void cmd_export_plot(const io::ExperimentConfig& config) {
  const std::string dir = ensure_out_dir(config);
  const std::pair<const char*, const char*> candidates[] = {
      {"truth", "truth.csv"}, {"phy", "phy.csv"}, {"pred", "pred.csv"}};

  std::vector<std::pair<std::string, io::FieldCsv>> series;
  for (const auto& [name, file] : candidates) {
    const std::string path = out_path(dir, file);
    if (!fs::exists(path)) continue;
    series.emplace_back(name, io::read_field_csv(path));
  }
  if (series.empty())
    throw IoError("no field files (truth.csv, phy.csv, pred.csv) found in '" + dir + "'");

  const std::string out_file = out_path(dir, "plot.csv");
  std::ofstream out(out_file, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + out_file + "' for writing");
  out << "timestamp,depth,series,value\n";
  for (const auto& [name, field] : series) {
    for (std::size_t t = 0; t < field.values.rows(); ++t)
      for (std::size_t d = 0; d < field.depths_m.size(); ++d)
        out << format_iso_date(field.timestamps[t]) << ','
            << io::format_double(field.depths_m[d]) << ',' << name << ','
            << io::format_double(field.values(t, d)) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + out_file + "'");
}

}  // namespace pglake::cmd
