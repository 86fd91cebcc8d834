#ifndef MFNET_MFNET_H
#define MFNET_MFNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MFNET_BUILDING)
#define MFNET_API __declspec(dllexport)
#else
#define MFNET_API __declspec(dllimport)
#endif
#else
#define MFNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfnet_status {
  MFNET_OK = 0,
  MFNET_INVALID_ARGUMENT = 1,
  MFNET_DOMAIN_ERROR = 2,
  MFNET_INTEGRATION_FAULT = 3,
  MFNET_STIFFNESS = 4,
  MFNET_BRANCH_LOST = 5,
  MFNET_NOT_APPLICABLE = 6,
  MFNET_BISTABLE_REGIME = 7,
  MFNET_IO_ERROR = 8,
  MFNET_INTERNAL_ERROR = 9
} mfnet_status;

/* Experiment configuration (JSON document validated against the schema). */
typedef struct mfnet_config mfnet_config;
/* Output of one run: named files plus a JSON summary. */
typedef struct mfnet_result mfnet_result;

MFNET_API const char* mfnet_version(void);
MFNET_API const char* mfnet_status_name(mfnet_status status);

/* Message of the last failing call on this thread; "" when none. */
MFNET_API const char* mfnet_last_error(void);
/* Time of the failure for MFNET_INTEGRATION_FAULT and MFNET_STIFFNESS, else NaN. */
MFNET_API double mfnet_last_error_time(void);

MFNET_API mfnet_status mfnet_set_threads(unsigned threads);

/* Newline separated names. The pointer stays valid for the process lifetime. */
MFNET_API const char* mfnet_preset_names(void);
MFNET_API const char* mfnet_subcommand_names(void);
/* Embedded JSON text of a preset or schema ("schema/experiment.schema.json"). */
MFNET_API mfnet_status mfnet_resource(const char* path, const char** text);

MFNET_API mfnet_status mfnet_config_from_json(const char* json, mfnet_config** out);
MFNET_API mfnet_status mfnet_config_from_preset(const char* subcommand, const char* preset, mfnet_config** out);
MFNET_API void mfnet_config_free(mfnet_config* config);

/* "key=value" override; see the README for the accepted keys. */
MFNET_API mfnet_status mfnet_config_set(mfnet_config* config, const char* assignment);
MFNET_API mfnet_status mfnet_config_set_seed(mfnet_config* config, uint64_t seed);
MFNET_API mfnet_status mfnet_config_set_subcommand(mfnet_config* config, const char* subcommand);

/* Fully resolved document (defaults filled, execution settings removed).
   The string is owned by the config and valid until its next modification. */
MFNET_API mfnet_status mfnet_config_resolved_json(mfnet_config* config, const char** json);

MFNET_API mfnet_status mfnet_run(const mfnet_config* config, mfnet_result** out);
MFNET_API void mfnet_result_free(mfnet_result* result);

MFNET_API size_t mfnet_result_file_count(const mfnet_result* result);
MFNET_API const char* mfnet_result_file_name(const mfnet_result* result, size_t index);
MFNET_API const char* mfnet_result_file_content(const mfnet_result* result, size_t index);
MFNET_API const char* mfnet_result_summary_json(const mfnet_result* result);
/* Wall time of bench runs in seconds; 0 for other subcommands. */
MFNET_API double mfnet_result_wall_seconds(const mfnet_result* result);
/* Writes every file atomically into directory, creating it when missing. */
MFNET_API mfnet_status mfnet_result_write(const mfnet_result* result, const char* directory);

/* Noise-averaged sigmoid and its inverse. */
MFNET_API mfnet_status mfnet_effective_gain(double x, double gain, double noise_sd, double* out);
MFNET_API mfnet_status mfnet_effective_gain_inverse(double y, double gain, double noise_sd, double* out);

#ifdef __cplusplus
}
#endif

#endif
