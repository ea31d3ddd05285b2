#pragma once

#include "io/config.hpp"

namespace pglake::cmd {

// The five pipeline commands behind the CLI. Each is a pure function of the
// config document and any input files it names; reruns are byte-identical.

// Emits drivers.csv, truth.csv, phy.csv, obs.csv, scalar_truth.csv and
// scalar_phy.csv into the output directory.
void cmd_gen(const io::ExperimentConfig& config);

// Trains the configured variant; writes model.ckpt and history.csv.
void cmd_train(const io::ExperimentConfig& config);

// Evaluates the configured variant on the test period; writes metrics.csv
// and pred.csv. The phy variant evaluates the physics output directly.
void cmd_eval(const io::ExperimentConfig& config);

// Extracts thermocline depths from a wide field file; writes thermocline.csv
// and prints the day-to-day smoothness statistic.
void cmd_thermocline(const io::ExperimentConfig& config);

// Reshapes the wide field files into one tidy long table (plot.csv).
void cmd_export_plot(const io::ExperimentConfig& config);

}  // namespace pglake::cmd
