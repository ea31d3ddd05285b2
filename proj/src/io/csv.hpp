#pragma once

#include <string>
#include <vector>

#include "ad/tensor.hpp"
#include "common/dates.hpp"
#include "physics/physics.hpp"
#include "sim/lakesim.hpp"

namespace pglake::io {

// Shortest round-trip decimal representation; parse(format(x)) == x.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Strict reader: every row must have exactly the header's column count.
CsvTable read_csv(const std::string& path);

// Depth column header, meters to one decimal ("t_00.0" ... "t_25.0").
std::string depth_column_name(double depth_m);

// drivers.csv: timestamp + the 11 named driver columns.
void write_drivers_csv(const std::string& path, const sim::DriverSeries& drivers);
sim::DriverSeries read_drivers_csv(const std::string& path);

// Wide temperature fields: timestamp + one column per depth.
void write_field_csv(const std::string& path, const ad::Tensor& values,
                     const std::vector<EpochDay>& timestamps,
                     const std::vector<double>& depths_m);
struct FieldCsv {
  ad::Tensor values;
  std::vector<EpochDay> timestamps;
  std::vector<double> depths_m;
};
FieldCsv read_field_csv(const std::string& path);

// obs.csv: timestamp, depth_m, temp_c. Reading resolves rows against the
// reference timestamps and grid depths (exact match required).
void write_obs_csv(const std::string& path, const sim::ObservationSet& obs,
                   const std::vector<EpochDay>& timestamps, const std::vector<double>& depths_m);
sim::ObservationSet read_obs_csv(const std::string& path,
                                 const std::vector<EpochDay>& timestamps,
                                 const std::vector<double>& depths_m);

// Scalar series: timestamp, conc.
void write_scalar_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<EpochDay>& timestamps);
struct ScalarCsv {
  std::vector<double> values;
  std::vector<EpochDay> timestamps;
};
ScalarCsv read_scalar_csv(const std::string& path);

}  // namespace pglake::io
