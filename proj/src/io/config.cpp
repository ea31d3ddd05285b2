#include "io/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "common/errors.hpp"

namespace pglake::io {

namespace {

using nlohmann::json;

// One schema entry per key: getter for serialization, setter with type and
// range validation.
struct Field {
  std::function<json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const json&)> set;
};

void expect_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
}

void expect_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
}

double number_in(const json& v, const std::string& key, double lo, double hi) {
  expect_number(v, key);
  const double x = v.get<double>();
  if (!(x >= lo && x <= hi))
    throw ConfigError("config key '" + key + "' = " + std::to_string(x) +
                      " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::int64_t integer_in(const json& v, const std::string& key, std::int64_t lo,
                        std::int64_t hi) {
  if (!v.is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  const std::int64_t x = v.get<std::int64_t>();
  if (x < lo || x > hi)
    throw ConfigError("config key '" + key + "' = " + std::to_string(x) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

const std::map<std::string, Field>& schema() {
  static const std::map<std::string, Field> s = [] {
    std::map<std::string, Field> m;
    auto add = [&m](const std::string& key, std::function<json(const ExperimentConfig&)> get,
                    std::function<void(ExperimentConfig&, const json&)> set) {
      m.emplace(key, Field{std::move(get), std::move(set)});
    };

    add("sim.years_train", [](const ExperimentConfig& c) { return json(c.sim.years_train); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.years_train = integer_in(v, "sim.years_train", 1, 200);
        });
    add("sim.years_test", [](const ExperimentConfig& c) { return json(c.sim.years_test); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.years_test = integer_in(v, "sim.years_test", 1, 200);
        });
    add("sim.seed", [](const ExperimentConfig& c) { return json(c.sim.seed); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.seed = static_cast<std::uint64_t>(
              integer_in(v, "sim.seed", 0, std::numeric_limits<std::int64_t>::max()));
        });
    add("sim.start_date", [](const ExperimentConfig& c) { return json(c.sim.start_date); },
        [](ExperimentConfig& c, const json& v) {
          expect_string(v, "sim.start_date");
          c.sim.start_date = v.get<std::string>();
          try {
            parse_iso_date(c.sim.start_date);
          } catch (const IoError& e) {
            throw ConfigError(std::string("config key 'sim.start_date': ") + e.what());
          }
        });
    add("sim.max_depth_m", [](const ExperimentConfig& c) { return json(c.sim.max_depth_m); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.max_depth_m = number_in(v, "sim.max_depth_m", 2.0, 500.0);
        });
    add("sim.depth_step_m", [](const ExperimentConfig& c) { return json(c.sim.depth_step_m); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.depth_step_m = number_in(v, "sim.depth_step_m", 0.1, 50.0);
        });
    add("sim.surface_area_m2",
        [](const ExperimentConfig& c) { return json(c.sim.surface_area_m2); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.surface_area_m2 = number_in(v, "sim.surface_area_m2", 1.0, 1e12);
        });
    add("sim.area_taper", [](const ExperimentConfig& c) { return json(c.sim.area_taper); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.area_taper = number_in(v, "sim.area_taper", 0.01, 1.0);
        });
    add("sim.diffusivity_m2_s",
        [](const ExperimentConfig& c) { return json(c.sim.diffusivity_m2_s); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.diffusivity_m2_s = number_in(v, "sim.diffusivity_m2_s", 1e-8, 1e-1);
        });
    add("sim.perturb_diffusivity",
        [](const ExperimentConfig& c) { return json(c.sim.perturb_diffusivity); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.perturb_diffusivity = number_in(v, "sim.perturb_diffusivity", 0.25, 4.0);
        });
    add("sim.perturb_albedo",
        [](const ExperimentConfig& c) { return json(c.sim.perturb_albedo); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.perturb_albedo = number_in(v, "sim.perturb_albedo", 0.25, 4.0);
        });
    add("sim.perturb_bulk", [](const ExperimentConfig& c) { return json(c.sim.perturb_bulk); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.perturb_bulk = number_in(v, "sim.perturb_bulk", 0.25, 4.0);
        });
    add("sim.missing_rate", [](const ExperimentConfig& c) { return json(c.sim.missing_rate); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.missing_rate = number_in(v, "sim.missing_rate", 0.0, 1.0);
        });
    add("sim.noise_sigma_c", [](const ExperimentConfig& c) { return json(c.sim.noise_sigma_c); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.noise_sigma_c = number_in(v, "sim.noise_sigma_c", 0.0, 10.0);
        });
    add("sim.scalar_missing_rate",
        [](const ExperimentConfig& c) { return json(c.sim.scalar_missing_rate); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.scalar_missing_rate = number_in(v, "sim.scalar_missing_rate", 0.0, 1.0);
        });
    add("sim.scalar_noise_sigma",
        [](const ExperimentConfig& c) { return json(c.sim.scalar_noise_sigma); },
        [](ExperimentConfig& c, const json& v) {
          c.sim.scalar_noise_sigma = number_in(v, "sim.scalar_noise_sigma", 0.0, 1.0);
        });

    add("model.variant", [](const ExperimentConfig& c) { return json(c.model.variant); },
        [](ExperimentConfig& c, const json& v) {
          expect_string(v, "model.variant");
          const std::string name = v.get<std::string>();
          if (name != "phy" && name != "ann" && name != "rnn" && name != "pgrnn0" &&
              name != "pgrnn")
            throw ConfigError("config key 'model.variant' must be phy|ann|rnn|pgrnn0|pgrnn");
          c.model.variant = name;
        });
    add("model.target", [](const ExperimentConfig& c) { return json(c.model.target); },
        [](ExperimentConfig& c, const json& v) {
          expect_string(v, "model.target");
          const std::string name = v.get<std::string>();
          if (name != "temperature" && name != "scalar")
            throw ConfigError("config key 'model.target' must be temperature|scalar");
          c.model.target = name;
        });
    add("model.hidden", [](const ExperimentConfig& c) { return json(c.model.hidden); },
        [](ExperimentConfig& c, const json& v) {
          c.model.hidden = integer_in(v, "model.hidden", 1, 128);
        });
    add("model.window", [](const ExperimentConfig& c) { return json(c.model.window); },
        [](ExperimentConfig& c, const json& v) {
          c.model.window = integer_in(v, "model.window", 2, 2000);
        });

    add("loss.lambda_dp", [](const ExperimentConfig& c) { return json(c.loss.lambda_dp); },
        [](ExperimentConfig& c, const json& v) {
          c.loss.lambda_dp = number_in(v, "loss.lambda_dp", 0.0, 1e6);
        });
    add("loss.lambda_ec", [](const ExperimentConfig& c) { return json(c.loss.lambda_ec); },
        [](ExperimentConfig& c, const json& v) {
          c.loss.lambda_ec = number_in(v, "loss.lambda_ec", 0.0, 1e6);
        });
    add("loss.w_obs", [](const ExperimentConfig& c) { return json(c.loss.w_obs); },
        [](ExperimentConfig& c, const json& v) {
          c.loss.w_obs = number_in(v, "loss.w_obs", 1e-9, 1e6);
        });
    add("loss.w_phy", [](const ExperimentConfig& c) { return json(c.loss.w_phy); },
        [](ExperimentConfig& c, const json& v) {
          c.loss.w_phy = number_in(v, "loss.w_phy", 0.0, 1e6);
        });
    add("loss.tau", [](const ExperimentConfig& c) { return json(c.loss.tau); },
        [](ExperimentConfig& c, const json& v) {
          c.loss.tau = number_in(v, "loss.tau", -1.0, 1e18);
        });

    add("train.rate", [](const ExperimentConfig& c) { return json(c.train.rate); },
        [](ExperimentConfig& c, const json& v) {
          c.train.rate = number_in(v, "train.rate", 1e-8, 1.0);
        });
    add("train.epochs", [](const ExperimentConfig& c) { return json(c.train.epochs); },
        [](ExperimentConfig& c, const json& v) {
          c.train.epochs = integer_in(v, "train.epochs", 1, 100000);
        });
    add("train.batch", [](const ExperimentConfig& c) { return json(c.train.batch); },
        [](ExperimentConfig& c, const json& v) {
          c.train.batch = integer_in(v, "train.batch", 1, 1024);
        });
    add("train.seed", [](const ExperimentConfig& c) { return json(c.train.seed); },
        [](ExperimentConfig& c, const json& v) {
          c.train.seed = static_cast<std::uint64_t>(
              integer_in(v, "train.seed", 0, std::numeric_limits<std::int64_t>::max()));
        });
    add("train.val_fraction",
        [](const ExperimentConfig& c) { return json(c.train.val_fraction); },
        [](ExperimentConfig& c, const json& v) {
          c.train.val_fraction = number_in(v, "train.val_fraction", 0.0, 0.5);
        });

    add("io.out_dir", [](const ExperimentConfig& c) { return json(c.io.out_dir); },
        [](ExperimentConfig& c, const json& v) {
          expect_string(v, "io.out_dir");
          c.io.out_dir = v.get<std::string>();
          if (c.io.out_dir.empty()) throw ConfigError("config key 'io.out_dir' must not be empty");
        });
    add("io.field", [](const ExperimentConfig& c) { return json(c.io.field); },
        [](ExperimentConfig& c, const json& v) {
          expect_string(v, "io.field");
          c.io.field = v.get<std::string>();
          if (c.io.field.empty()) throw ConfigError("config key 'io.field' must not be empty");
        });
    return m;
  }();
  return s;
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + origin + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config '" + origin + "' must be a JSON object");

  ExperimentConfig config;
  const auto& fields = schema();
  for (const auto& [section, body] : doc.items()) {
    if (section != "sim" && section != "model" && section != "loss" && section != "train" &&
        section != "io")
      throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object())
      throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string dotted = section + "." + key;
      const auto it = fields.find(dotted);
      if (it == fields.end()) throw ConfigError("unknown config key '" + dotted + "'");
      it->second.set(config, value);
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_override(ExperimentConfig& config, const std::string& dotted_key,
                    const std::string& value) {
  const auto it = schema().find(dotted_key);
  if (it == schema().end()) throw ConfigError("unknown config key '" + dotted_key + "'");
  // Reuse the JSON path: strings that fail to parse as JSON scalars are
  // treated as plain strings (so --set model.variant=rnn works unquoted).
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = json(value);
  }
  if (v.is_object() || v.is_array())
    throw ConfigError("config key '" + dotted_key + "' must be a scalar");
  it->second.set(config, v);
}

std::string resolve_out_dir(const ExperimentConfig& config) {
  const std::string& dir = config.io.out_dir;
  if (!dir.empty() && dir.front() == '/') return dir;
  const char* root = std::getenv("PGLAKE_OUT");
  if (root && *root) return std::string(root) + "/" + dir;
  return dir;
}

std::string config_to_json(const ExperimentConfig& config) {
  json doc;
  for (const auto& [key, field] : schema()) {
    const auto dot = key.find('.');
    doc[key.substr(0, dot)][key.substr(dot + 1)] = field.get(config);
  }
  return doc.dump(2) + "\n";
}

}  // namespace pglake::io
