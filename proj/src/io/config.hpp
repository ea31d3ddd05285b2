#pragma once

#include <cstdint>
#include <string>

#include "common/dates.hpp"

namespace pglake::io {

// Experiment document, JSON on disk with sections sim/model/loss/train/io.
// Unknown keys are rejected; a run is reproducible from the file alone.

struct SimSection {
  std::int64_t years_train = 8;
  std::int64_t years_test = 4;
  std::uint64_t seed = 4242;
  std::string start_date = "2000-01-01";
  double max_depth_m = 25.0;
  double depth_step_m = 1.0;
  double surface_area_m2 = 1.0e6;
  double area_taper = 0.2;
  double diffusivity_m2_s = 2e-5;
  double perturb_diffusivity = 2.5;
  double perturb_albedo = 1.6;
  double perturb_bulk = 0.7;
  double missing_rate = 0.6;
  double noise_sigma_c = 0.8;
  double scalar_missing_rate = 0.75;
  double scalar_noise_sigma = 0.004;
};

struct ModelSection {
  std::string variant = "pgrnn";        // phy|ann|rnn|pgrnn0|pgrnn
  std::string target = "temperature";   // temperature|scalar
  std::int64_t hidden = 32;
  std::int64_t window = 200;
};

struct LossSection {
  double lambda_dp = 1.0;
  double lambda_ec = 0.01;
  double w_obs = 1.0;
  double w_phy = 0.2;
  double tau = -1.0;  // joules; negative selects the automatic slack
};

struct TrainSection {
  double rate = 1e-3;
  std::int64_t epochs = 60;
  std::int64_t batch = 2;
  std::uint64_t seed = 1;
  double val_fraction = 0.2;
};

struct IoSection {
  std::string out_dir = "out";
  std::string field = "pred.csv";  // input of thermocline/export-plot
};

struct ExperimentConfig {
  SimSection sim;
  ModelSection model;
  LossSection loss;
  TrainSection train;
  IoSection io;

  std::size_t days_train() const { return static_cast<std::size_t>(years_train_days()); }
  std::size_t days_total() const {
    return static_cast<std::size_t>((sim.years_train + sim.years_test) * 365);
  }
  EpochDay start_day() const { return parse_iso_date(sim.start_date); }

 private:
  std::int64_t years_train_days() const { return sim.years_train * 365; }
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Applies "section.key=value" overrides (CLI --set).
void apply_override(ExperimentConfig& config, const std::string& dotted_key,
                    const std::string& value);

// Output directory resolution: absolute paths win; relative paths are rooted
// at $PGLAKE_OUT when it is set.
std::string resolve_out_dir(const ExperimentConfig& config);

std::string config_to_json(const ExperimentConfig& config);

}  // namespace pglake::io
