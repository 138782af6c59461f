#ifndef STOAT_STOAT_H
#define STOAT_STOAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef STOAT_BUILDING_LIBRARY
#    define STOAT_API __declspec(dllexport)
#  else
#    define STOAT_API __declspec(dllimport)
#  endif
#else
#  define STOAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning int returns one of these; the CLI
   uses the same values as process exit codes. */
typedef enum stoat_status {
  STOAT_OK = 0,
  STOAT_ERR_INVALID_INPUT = 2,
  STOAT_ERR_DEGENERATE_INPUT = 3,
  STOAT_ERR_INSUFFICIENT_DATA = 4,
  STOAT_ERR_ESTIMATION = 5,
  STOAT_ERR_NONSTATIONARY = 6,
  STOAT_ERR_DIVERGENCE = 7,
  STOAT_ERR_PARSE = 8,
  STOAT_ERR_IO = 9,
  STOAT_ERR_ALIGNMENT = 10,
  STOAT_ERR_GENERATOR_INSTABILITY = 11,
  STOAT_ERR_INTERNAL = 12
} stoat_status;

typedef struct stoat_config stoat_config;
typedef struct stoat_spatial stoat_spatial;
typedef struct stoat_model stoat_model;

STOAT_API const char* stoat_version(void);
STOAT_API const char* stoat_status_name(int status);

/* Message of the most recent failing call on this thread ("" if none). */
STOAT_API const char* stoat_last_error(void);

/* Run configuration (key=value). */
STOAT_API int stoat_config_new(stoat_config** out);
STOAT_API int stoat_config_load(const char* path, stoat_config** out);
STOAT_API void stoat_config_free(stoat_config* config);
STOAT_API int stoat_config_set(stoat_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncated to capacity); *needed
   receives the full length including the terminator. */
STOAT_API int stoat_config_get(const stoat_config* config, const char* key, char* buf,
                               size_t capacity, size_t* needed);
STOAT_API size_t stoat_config_key_count(void);
STOAT_API int stoat_config_key_info(size_t index, const char** name, const char** default_value,
                                    const char** description);

/* Pipeline stages: "build-spatial", "estimate", "adjust", "train",
   "forecast", "evaluate", "simulate", "pipeline". */
STOAT_API int stoat_run_stage(const stoat_config* config, const char* stage);

/* Scores a forecast_samples.csv against a panel-format truth file and writes
   scores.csv, scores_by_region.csv and scores_long.csv into out_dir. */
STOAT_API int stoat_evaluate_files(const char* forecast_path, const char* truth_path,
                                   const char* out_dir, const char* model_label);

/* Spatial weights. */
STOAT_API int stoat_geodesic_distance(double lat1, double lon1, double lat2, double lon2,
                                      double* km);
STOAT_API int stoat_spatial_build(size_t n, const double* lat, const double* lon, double alpha,
                                  stoat_spatial** out);
STOAT_API void stoat_spatial_free(stoat_spatial* s);
STOAT_API size_t stoat_spatial_size(const stoat_spatial* s);
/* Writes n*n weights, row-major. */
STOAT_API int stoat_spatial_weights(const stoat_spatial* s, double* out);

/* Scoring rules. */
STOAT_API int stoat_quantile(const double* samples, size_t n, double q, double* out);
STOAT_API int stoat_crps(const double* samples, size_t n, double observed, double* out);
/* paths: n_paths x dim, row-major. */
STOAT_API int stoat_energy_score(const double* paths, size_t n_paths, size_t dim,
                                 const double* observed, double* out);

/* Forecast models. */
STOAT_API int stoat_model_load(const char* path, stoat_model** out);
STOAT_API int stoat_model_save(const stoat_model* model, const char* path);
STOAT_API void stoat_model_free(stoat_model* model);
STOAT_API int stoat_model_info(const stoat_model* model, size_t* regions, size_t* context_len,
                               size_t* horizon);
/* z and y: regions x periods, row-major, on the model's input scale.
   out: regions x horizon x num_samples. */
STOAT_API int stoat_model_forecast(const stoat_model* model, const double* z, const double* y,
                                   size_t regions, size_t periods, size_t horizon,
                                   size_t num_samples, uint64_t seed, double* out);

#ifdef __cplusplus
}
#endif

#endif
