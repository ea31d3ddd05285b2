#include "io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace pglake::io {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw IoError("invalid number '" + s + "' in " + context);
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = l.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(l.substr(start));
        break;
      }
      fields.push_back(l.substr(start, pos - start));
      start = pos + 1;
    }
    return fields;
  };
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size())
      throw ShapeError("'" + path + "' row " + std::to_string(table.rows.size() + 2) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::string depth_column_name(double depth_m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t_%04.1f", depth_m);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void write_drivers_csv(const std::string& path, const sim::DriverSeries& drivers) {
  auto out = open_out(path);
  out << "timestamp";
  for (std::size_t c = 0; c < sim::kDriverCount; ++c) out << ',' << sim::kDriverNames[c];
  out << '\n';
  for (std::size_t t = 0; t < drivers.steps(); ++t) {
    out << format_iso_date(drivers.timestamps[t]);
    for (std::size_t c = 0; c < sim::kDriverCount; ++c)
      out << ',' << format_double(drivers.values(t, c));
    out << '\n';
  }
  finish(out, path);
}

sim::DriverSeries read_drivers_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != sim::kDriverCount + 1 || table.header[0] != "timestamp")
    throw ShapeError("'" + path + "' must have a timestamp column plus the " +
                     std::to_string(sim::kDriverCount) + " driver columns");
  for (std::size_t c = 0; c < sim::kDriverCount; ++c)
    if (table.header[c + 1] != sim::kDriverNames[c])
      throw ShapeError("'" + path + "' column " + std::to_string(c + 2) + " is '" +
                       table.header[c + 1] + "', expected '" + sim::kDriverNames[c] + "'");
  if (table.rows.size() < 2) throw ShapeError("'" + path + "' needs at least two rows");
  sim::DriverSeries drivers;
  drivers.values = ad::Tensor(table.rows.size(), sim::kDriverCount);
  drivers.timestamps.resize(table.rows.size());
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    drivers.timestamps[t] = parse_iso_date(table.rows[t][0]);
    for (std::size_t c = 0; c < sim::kDriverCount; ++c)
      drivers.values(t, c) = parse_double(table.rows[t][c + 1], path);
  }
  return drivers;
}

void write_field_csv(const std::string& path, const ad::Tensor& values,
                     const std::vector<EpochDay>& timestamps,
                     const std::vector<double>& depths_m) {
  if (values.rows() != timestamps.size() || values.cols() != depths_m.size())
    throw ShapeError("field write: values " + values.shape_str() + " vs " +
                     std::to_string(timestamps.size()) + " timestamps, " +
                     std::to_string(depths_m.size()) + " depths");
  auto out = open_out(path);
  out << "timestamp";
  for (double z : depths_m) out << ',' << depth_column_name(z);
  out << '\n';
  for (std::size_t t = 0; t < values.rows(); ++t) {
    out << format_iso_date(timestamps[t]);
    for (std::size_t d = 0; d < values.cols(); ++d) out << ',' << format_double(values(t, d));
    out << '\n';
  }
  finish(out, path);
}

FieldCsv read_field_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "timestamp")
    throw ShapeError("'" + path + "' must have a timestamp column plus depth columns");
  FieldCsv field;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    if (name.rfind("t_", 0) != 0)
      throw ShapeError("'" + path + "' depth column '" + name + "' must look like t_00.0");
    field.depths_m.push_back(parse_double(name.substr(2), path + " header"));
  }
  if (table.rows.empty()) throw ShapeError("'" + path + "' has no data rows");
  field.values = ad::Tensor(table.rows.size(), field.depths_m.size());
  field.timestamps.resize(table.rows.size());
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    field.timestamps[t] = parse_iso_date(table.rows[t][0]);
    for (std::size_t d = 0; d < field.depths_m.size(); ++d)
      field.values(t, d) = parse_double(table.rows[t][d + 1], path);
  }
  return field;
}

void write_obs_csv(const std::string& path, const sim::ObservationSet& obs,
                   const std::vector<EpochDay>& timestamps,
                   const std::vector<double>& depths_m) {
  auto out = open_out(path);
  out << "timestamp,depth_m,temp_c\n";
  for (const auto& e : obs.entries) {
    out << format_iso_date(timestamps.at(e.t)) << ',' << format_double(depths_m.at(e.depth))
        << ',' << format_double(e.value_c) << '\n';
  }
  finish(out, path);
}

sim::ObservationSet read_obs_csv(const std::string& path,
                                 const std::vector<EpochDay>& timestamps,
                                 const std::vector<double>& depths_m) {
  const CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"timestamp", "depth_m", "temp_c"})
    throw ShapeError("'" + path + "' must have header timestamp,depth_m,temp_c");
  sim::ObservationSet obs;
  obs.steps = timestamps.size();
  obs.depths = depths_m.size();
  obs.mask.assign(obs.steps * obs.depths, 0);
  const EpochDay t0 = timestamps.empty() ? 0 : timestamps.front();
  for (const auto& row : table.rows) {
    const EpochDay day = parse_iso_date(row[0]);
    const auto t = static_cast<std::size_t>(day - t0);
    if (day < t0 || t >= obs.steps || timestamps[t] != day)
      throw ShapeError("'" + path + "' timestamp " + row[0] + " is outside the field range");
    const double z = parse_double(row[1], path);
    std::size_t depth = obs.depths;
    for (std::size_t d = 0; d < obs.depths; ++d)
      if (std::fabs(depths_m[d] - z) < 1e-9) {
        depth = d;
        break;
      }
    if (depth == obs.depths)
      throw ShapeError("'" + path + "' depth " + row[1] + " is not on the grid");
    obs.entries.push_back({t, depth, parse_double(row[2], path)});
    obs.mask[t * obs.depths + depth] = 1;
  }
  return obs;
}

void write_scalar_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<EpochDay>& timestamps) {
  if (values.size() != timestamps.size())
    throw ShapeError("scalar write: value/timestamp count mismatch");
  auto out = open_out(path);
  out << "timestamp,conc\n";
  for (std::size_t t = 0; t < values.size(); ++t)
    out << format_iso_date(timestamps[t]) << ',' << format_double(values[t]) << '\n';
  finish(out, path);
}

ScalarCsv read_scalar_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"timestamp", "conc"})
    throw ShapeError("'" + path + "' must have header timestamp,conc");
  ScalarCsv out;
  for (const auto& row : table.rows) {
    out.timestamps.push_back(parse_iso_date(row[0]));
    out.values.push_back(parse_double(row[1], path));
  }
  return out;
}

}  // namespace pglake::io
