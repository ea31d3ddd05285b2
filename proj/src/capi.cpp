#include "pglake/pglake.h"

#include <exception>
#include <string>

#include "cmd/commands.hpp"
#include "common/errors.hpp"
#include "io/config.hpp"
#include "physics/physics.hpp"

struct pglake_config {
  pglake::io::ExperimentConfig value;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
pglake_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PGLAKE_OK;
  } catch (const pglake::ConfigError& e) {
    g_last_error = e.what();
    return PGLAKE_ERR_CONFIG;
  } catch (const pglake::IoError& e) {
    g_last_error = e.what();
    return PGLAKE_ERR_IO;
  } catch (const pglake::ShapeError& e) {
    g_last_error = e.what();
    return PGLAKE_ERR_SHAPE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PGLAKE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PGLAKE_ERR_INTERNAL;
  }
}

pglake_status require_handle(const void* p) {
  if (p) return PGLAKE_OK;
  g_last_error = "null handle";
  return PGLAKE_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* pglake_version(void) { return "0.1.0"; }

const char* pglake_last_error(void) { return g_last_error.c_str(); }

pglake_status pglake_config_default(pglake_config** out) {
  if (require_handle(out) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { *out = new pglake_config{pglake::io::default_config()}; });
}

pglake_status pglake_config_load(const char* path, pglake_config** out) {
  if (require_handle(out) != PGLAKE_OK || require_handle(path) != PGLAKE_OK)
    return PGLAKE_ERR_CONFIG;
  return guarded([&] { *out = new pglake_config{pglake::io::load_config(path)}; });
}

pglake_status pglake_config_set(pglake_config* config, const char* dotted_key,
                                const char* value) {
  if (require_handle(config) != PGLAKE_OK || require_handle(dotted_key) != PGLAKE_OK ||
      require_handle(value) != PGLAKE_OK)
    return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::io::apply_override(config->value, dotted_key, value); });
}

pglake_status pglake_config_dump(const pglake_config* config, char* buffer, size_t buffer_size,
                                 size_t* needed) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] {
    const std::string text = pglake::io::config_to_json(config->value);
    if (needed) *needed = text.size() + 1;
    if (buffer && buffer_size > 0) {
      const size_t n = text.size() + 1 <= buffer_size ? text.size() : buffer_size - 1;
      text.copy(buffer, n);
      buffer[n] = '\0';
    }
  });
}

void pglake_config_free(pglake_config* config) { delete config; }

pglake_status pglake_cmd_gen(const pglake_config* config) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::cmd::cmd_gen(config->value); });
}

pglake_status pglake_cmd_train(const pglake_config* config) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::cmd::cmd_train(config->value); });
}

pglake_status pglake_cmd_eval(const pglake_config* config) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::cmd::cmd_eval(config->value); });
}

pglake_status pglake_cmd_thermocline(const pglake_config* config) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::cmd::cmd_thermocline(config->value); });
}

pglake_status pglake_cmd_export_plot(const pglake_config* config) {
  if (require_handle(config) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { pglake::cmd::cmd_export_plot(config->value); });
}

pglake_status pglake_water_density(double temp_c, double* rho_out) {
  if (require_handle(rho_out) != PGLAKE_OK) return PGLAKE_ERR_CONFIG;
  return guarded([&] { *rho_out = pglake::physics::density(temp_c); });
}

}  // extern "C"
