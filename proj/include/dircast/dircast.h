/*
 * dircast - C interface to the directory-consensus workbench.
 *
 * All objects are opaque and owned by the caller once returned; release them
 * with the matching *_free function. Functions returning dc_status report
 * failures through the status code and leave a message retrievable with
 * dc_last_error() on the calling thread.
 */
#ifndef DIRCAST_DIRCAST_H
#define DIRCAST_DIRCAST_H

#include <stddef.h>
#include <stdint.h>

#if defined(DIRCAST_BUILDING_LIBRARY)
#define DC_API __attribute__((visibility("default")))
#else
#define DC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_INVALID_ARGUMENT = 1,
  DC_ERR_CONFIG = 2, /* malformed or inconsistent configuration */
  DC_ERR_IO = 3,     /* file could not be read or written */
  DC_ERR_PARSE = 4,  /* malformed input document */
  DC_ERR_INTERNAL = 5
} dc_status;

/* Exit-code contract shared by the library and the command-line tool. */
enum {
  DC_EXIT_OK = 0,
  DC_EXIT_CONFIG = 1,
  DC_EXIT_EQUIVOCATION = 2,
  DC_EXIT_INCOMPLETE = 3,
  DC_EXIT_CHECK_FAILED = 4
};

typedef struct dc_config dc_config;
typedef struct dc_result dc_result;

/* Receives one human-readable progress or result line. */
typedef void (*dc_line_fn)(const char* line, void* user);

DC_API const char* dc_version(void);
/* Message of the last failed call on this thread; never NULL. */
DC_API const char* dc_last_error(void);

/* ---- configuration ------------------------------------------------------ */

DC_API dc_status dc_config_load(const char* path, dc_config** out);
DC_API dc_status dc_config_parse(const char* json_text, dc_config** out);
DC_API dc_status dc_config_set_seed(dc_config* config, uint64_t seed);
DC_API dc_status dc_config_set_seeds(dc_config* config, uint64_t first, uint64_t last);
/* Parses "A..B". */
DC_API dc_status dc_config_set_seed_range(dc_config* config, const char* range);
/* Comma-separated check names; replaces the configured list. */
DC_API dc_status dc_config_set_checks(dc_config* config, const char* names);
/* Report directory; NULL or "" disables file output. */
DC_API dc_status dc_config_set_output(dc_config* config, const char* dir);
DC_API dc_status dc_config_set_threads(dc_config* config, unsigned threads);
/* Number of (scenario, seed) executions the config describes. */
DC_API dc_status dc_config_execution_count(const dc_config* config, size_t* out);
/* Returns the config name; valid until the config is freed. */
DC_API const char* dc_config_name(const dc_config* config);
/* Acceptance criterion the config reproduces, or "" when it names none. */
DC_API const char* dc_config_criterion(const dc_config* config);
DC_API void dc_config_free(dc_config* config);

/* ---- operations ----------------------------------------------------------- */

/* Runs every (scenario, seed) with its checks and writes report files when an
 * output directory is set. `progress` may be NULL. */
DC_API dc_status dc_run(const dc_config* config, dc_line_fn progress, void* user, dc_result** out);
/* Runs the config's sweep section; writes sweep.csv and sweep.json. */
DC_API dc_status dc_sweep(const dc_config* config, dc_line_fn progress, void* user, dc_result** out);
/* Checks a received-votes dump. Verification keys are provisioned from the
 * config's scenario (size, signature scheme, seed). `last_safe_epoch` < 0
 * means no earlier document is known to be safe. */
DC_API dc_status dc_monitor_file(const dc_config* config, const char* dump_path, int64_t last_safe_epoch,
                                 dc_result** out);
/* Runs the acceptance suite. `only` is a comma-separated list of criterion
 * keys or NULL for all; `on_line` receives one PASS/FAIL line per criterion. */
DC_API dc_status dc_acceptance(const char* only, unsigned threads, dc_line_fn on_line, void* user,
                               dc_result** out);

/* ---- results -------------------------------------------------------------- */

DC_API int dc_result_exit_code(const dc_result* result);
/* JSON report; valid until the result is freed. */
DC_API const char* dc_result_json(const dc_result* result);
/* Short human-readable summary; valid until the result is freed. */
DC_API const char* dc_result_summary(const dc_result* result);
DC_API void dc_result_free(dc_result* result);

#ifdef __cplusplus
}
#endif

#endif /* DIRCAST_DIRCAST_H */
