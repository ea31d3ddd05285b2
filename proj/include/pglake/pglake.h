#ifndef PGLAKE_H
#define PGLAKE_H

/* C interface of the pglake shared library: opaque config handles, status
 * codes, and one entry point per pipeline command. Status codes double as
 * the CLI's exit codes. On failure, pglake_last_error() describes what went
 * wrong (thread-local storage). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pglake_status {
  PGLAKE_OK = 0,
  PGLAKE_ERR_INTERNAL = 1, /* numeric failure or unexpected error */
  PGLAKE_ERR_CONFIG = 2,   /* bad config key, value or combination */
  PGLAKE_ERR_IO = 3,       /* missing or unreadable/unwritable file */
  PGLAKE_ERR_SHAPE = 4     /* shape mismatch between files */
} pglake_status;

typedef struct pglake_config pglake_config;

const char* pglake_version(void);
const char* pglake_last_error(void);

/* Config handles. Creation yields the documented defaults; load merges a
 * JSON document over them; set applies one "section.key" override. */
pglake_status pglake_config_default(pglake_config** out);
pglake_status pglake_config_load(const char* path, pglake_config** out);
pglake_status pglake_config_set(pglake_config* config, const char* dotted_key,
                                const char* value);
/* Serializes the effective config as JSON. Writes at most buffer_size bytes
 * including the terminator; *needed receives the full length. */
pglake_status pglake_config_dump(const pglake_config* config, char* buffer,
                                 size_t buffer_size, size_t* needed);
void pglake_config_free(pglake_config* config);

/* Pipeline commands; each is a pure function of the config document and the
 * input files it names. */
pglake_status pglake_cmd_gen(const pglake_config* config);
pglake_status pglake_cmd_train(const pglake_config* config);
pglake_status pglake_cmd_eval(const pglake_config* config);
pglake_status pglake_cmd_thermocline(const pglake_config* config);
pglake_status pglake_cmd_export_plot(const pglake_config* config);

/* Freshwater density (kg/m^3) at a temperature (deg C). */
pglake_status pglake_water_density(double temp_c, double* rho_out);

#ifdef __cplusplus
}
#endif

#endif /* PGLAKE_H */
