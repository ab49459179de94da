/* etupscale — public C API for the ET upscaling library.
 *
 * Every function returns an etu_status; out-parameters are written only on
 * ETU_OK. Handles are opaque and must be released with their free/close
 * function. etu_last_error() describes the most recent failure on the
 * calling thread.
 */
#ifndef ETUPSCALE_H
#define ETUPSCALE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define ETU_API __declspec(dllexport)
#else
#  define ETU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define ETU_API_VERSION 1

typedef enum etu_status {
    ETU_OK = 0,
    ETU_E_INVALID_INPUT = 1,
    ETU_E_CONFIG = 2,
    ETU_E_IO = 3,
    ETU_E_EMPTY_DATA = 4,
    ETU_E_INVALID_K = 5,
    ETU_E_SCHEMA = 6,
    ETU_E_FORMAT = 7,
    ETU_E_INTERNAL = 8
} etu_status;

ETU_API uint32_t etu_api_version(void);

/* Thread-local message for the last failing call; empty string if none. */
ETU_API const char* etu_last_error(void);

/* ------------------------------------------------------------------ */
/* Physics                                                             */

ETU_API etu_status etu_saturation_vapor_pressure(double t_c, double* out_kpa);
ETU_API etu_status etu_actual_vapor_pressure(double tdew_c, double* out_kpa);
ETU_API etu_status etu_vapor_curve_slope(double t_c, double* out_kpa_per_c);
ETU_API etu_status etu_psychrometric_constant(double sp_kpa,
                                              double* out_kpa_per_c);
ETU_API etu_status etu_wind_speed_2m(double u10, double v10, double* out_ms);
ETU_API etu_status etu_extraterrestrial_radiation(double lat_deg, double doy,
                                                  double* out_mj_m2_day);
ETU_API etu_status etu_net_radiation(double ssr, double t_c, double ea_kpa,
                                     double ra, double* out_mj_m2_day);
ETU_API etu_status etu_penman_monteith(double rn, double g, double t_c,
                                       double u2, double es, double ea,
                                       double delta, double gamma,
                                       double* out_mm_day);
/* degenerate is set to 1 when tavg <= -17.8 C forces a zero result. */
ETU_API etu_status etu_hargreaves_samani(double tavg, double tmax, double tmin,
                                         double ra, double kt, int days,
                                         double* out_mm_dekad,
                                         int* degenerate);
ETU_API etu_status etu_le_to_et_depth(double le_wm2, double* out_mm_day);
ETU_API etu_status etu_et_depth_to_le(double et_mm_day, double* out_wm2);

/* ------------------------------------------------------------------ */
/* Batch workflows driven by a JSON run config                          */

typedef struct etu_run etu_run;

/* Loads a config file and applies "dotted.key=value" overrides. threads
 * caps library parallelism (<= 0 keeps the hardware default; results do
 * not depend on it). */
ETU_API etu_status etu_run_open(const char* config_path,
                                const char* const* overrides,
                                size_t n_overrides, int threads,
                                etu_run** out);
ETU_API void etu_run_close(etu_run* run);

/* NULL-terminated list of recognized dotted config keys. */
ETU_API const char* const* etu_config_keys(void);

/* Writes sites.csv, flux.csv, meteo.csv, reflectance.csv into out_dir. */
ETU_API etu_status etu_run_synth(etu_run* run, const char* out_dir);

/* Trains on the configured files; writes the model and a schema sidecar.
 * Either rmse pointer may be NULL. */
ETU_API etu_status etu_run_train(etu_run* run, const char* model_path,
                                 double* train_rmse_wm2,
                                 double* train_rmse_mm_day);

/* Grouped cross-validation report; either path may be NULL to skip it. */
ETU_API etu_status etu_run_cv(etu_run* run, const char* report_json_path,
                              const char* report_csv_path);

/* Exhaustive search over the config's "search" lists. On success stores a
 * malloc'd JSON string of the winning config in *best_config_json (free
 * with etu_string_free); result_csv_path may be NULL. */
ETU_API etu_status etu_run_grid_search(etu_run* run,
                                       const char* result_csv_path,
                                       char** best_config_json);

/* One mm/day ETGRID file per configured date (et_YYYY-MM-DD.etg), plus
 * monthly sums (et_YYYY-MM.etg) when write_monthly is nonzero and a month
 * is fully covered; write_csv adds a CSV companion per grid. */
ETU_API etu_status etu_run_predict_grid(etu_run* run, const char* model_path,
                                        const char* out_dir, int write_monthly,
                                        int write_csv);

ETU_API void etu_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Trained models                                                      */

typedef struct etu_model etu_model;

ETU_API etu_status etu_model_load(const char* path, etu_model** out);
ETU_API void etu_model_free(etu_model* model);
ETU_API etu_status etu_model_num_features(const etu_model* model, size_t* out);
/* features must hold n values in schema order (NaN = missing). */
ETU_API etu_status etu_model_predict(const etu_model* model,
                                     const double* features, size_t n,
                                     double* out_wm2);
/* Gain importance CSV (feature,gain,splits), top_n rows (0 = all). */
ETU_API etu_status etu_model_importance_csv(const etu_model* model,
                                            const char* path, int top_n);

/* ------------------------------------------------------------------ */
/* ETGRID raster files                                                 */

typedef struct etu_grid etu_grid;

ETU_API etu_status etu_grid_read(const char* path, etu_grid** out);
ETU_API void etu_grid_free(etu_grid* grid);
ETU_API etu_status etu_grid_write(const etu_grid* grid, const char* path);
/* target_unit: "W_m2", "mm_day" (mm_month grids cannot be converted). */
ETU_API etu_status etu_grid_convert_units(const etu_grid* grid,
                                          const char* target_unit,
                                          etu_grid** out);
ETU_API etu_status etu_grid_to_csv(const etu_grid* grid, const char* path);
ETU_API etu_status etu_grid_shape(const etu_grid* grid, size_t* n_rows,
                                  size_t* n_cols);
/* Unit tag of the grid ("W_m2", "mm_day", "mm_month"); pointer is owned by
 * the grid handle. */
ETU_API etu_status etu_grid_unit(const etu_grid* grid, const char** out);

#ifdef __cplusplus
}
#endif

#endif /* ETUPSCALE_H */
