#include "etupscale.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/gbdt.hpp"
#include "etup/gridio.hpp"
#include "etup/physics.hpp"
#include "etup/runconfig.hpp"
#include "etup/threads.hpp"

namespace {

thread_local std::string g_last_error;

etu_status status_of(const etup::Error& e) {
    switch (e.code()) {
        case etup::ErrorCode::invalid_input: return ETU_E_INVALID_INPUT;
        case etup::ErrorCode::config: return ETU_E_CONFIG;
        case etup::ErrorCode::io: return ETU_E_IO;
        case etup::ErrorCode::empty_data: return ETU_E_EMPTY_DATA;
        case etup::ErrorCode::invalid_k: return ETU_E_INVALID_K;
        case etup::ErrorCode::schema_mismatch: return ETU_E_SCHEMA;
        case etup::ErrorCode::bad_format: return ETU_E_FORMAT;
        case etup::ErrorCode::internal: return ETU_E_INTERNAL;
    }
    return ETU_E_INTERNAL;
}

template <typename Fn>
etu_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return ETU_OK;
    } catch (const etup::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ETU_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return ETU_E_INTERNAL;
    }
}

etu_status require(bool ok, const char* what) {
    if (ok) return ETU_OK;
    g_last_error = what;
    return ETU_E_INVALID_INPUT;
}

}  // namespace

struct etu_run {
    etup::run::RunConfig config;
};

struct etu_model {
    etup::gbdt::Ensemble ensemble;
};

struct etu_grid {
    etup::gridio::EtGrid grid;
};

extern "C" {

uint32_t etu_api_version(void) { return ETU_API_VERSION; }

const char* etu_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

etu_status etu_saturation_vapor_pressure(double t_c, double* out_kpa) {
    if (auto s = require(out_kpa, "null output pointer")) return s;
    return guarded([&] {
        *out_kpa = etup::physics::saturation_vapor_pressure(t_c);
    });
}

etu_status etu_actual_vapor_pressure(double tdew_c, double* out_kpa) {
    if (auto s = require(out_kpa, "null output pointer")) return s;
    return guarded([&] {
        *out_kpa = etup::physics::actual_vapor_pressure(tdew_c);
    });
}

etu_status etu_vapor_curve_slope(double t_c, double* out_kpa_per_c) {
    if (auto s = require(out_kpa_per_c, "null output pointer")) return s;
    return guarded([&] {
        *out_kpa_per_c = etup::physics::vapor_curve_slope(t_c);
    });
}

etu_status etu_psychrometric_constant(double sp_kpa, double* out_kpa_per_c) {
    if (auto s = require(out_kpa_per_c, "null output pointer")) return s;
    return guarded([&] {
        *out_kpa_per_c = etup::physics::psychrometric_constant(sp_kpa);
    });
}

etu_status etu_wind_speed_2m(double u10, double v10, double* out_ms) {
    if (auto s = require(out_ms, "null output pointer")) return s;
    return guarded([&] { *out_ms = etup::physics::wind_speed_2m(u10, v10); });
}

etu_status etu_extraterrestrial_radiation(double lat_deg, double doy,
                                          double* out_mj_m2_day) {
    if (auto s = require(out_mj_m2_day, "null output pointer")) return s;
    return guarded([&] {
        *out_mj_m2_day = etup::physics::extraterrestrial_radiation(
            {lat_deg, 0.0, doy});
    });
}

etu_status etu_net_radiation(double ssr, double t_c, double ea_kpa, double ra,
                             double* out_mj_m2_day) {
    if (auto s = require(out_mj_m2_day, "null output pointer")) return s;
    return guarded([&] {
        *out_mj_m2_day = etup::physics::net_radiation(ssr, t_c, ea_kpa, ra);
    });
}

etu_status etu_penman_monteith(double rn, double g, double t_c, double u2,
                               double es, double ea, double delta,
                               double gamma, double* out_mm_day) {
    if (auto s = require(out_mm_day, "null output pointer")) return s;
    return guarded([&] {
        *out_mm_day = etup::physics::penman_monteith(
            {rn, g, t_c, u2, es, ea, delta, gamma});
    });
}

etu_status etu_hargreaves_samani(double tavg, double tmax, double tmin,
                                 double ra, double kt, int days,
                                 double* out_mm_dekad, int* degenerate) {
    if (auto s = require(out_mm_dekad, "null output pointer")) return s;
    return guarded([&] {
        auto r = etup::physics::hargreaves_samani(tavg, tmax, tmin, ra, kt,
                                                  days);
        *out_mm_dekad = r.et_mm_dekad;
        if (degenerate) *degenerate = r.degenerate ? 1 : 0;
    });
}

etu_status etu_le_to_et_depth(double le_wm2, double* out_mm_day) {
    if (auto s = require(out_mm_day, "null output pointer")) return s;
    return guarded([&] { *out_mm_day = etup::physics::le_to_et_depth(le_wm2); });
}

etu_status etu_et_depth_to_le(double et_mm_day, double* out_wm2) {
    if (auto s = require(out_wm2, "null output pointer")) return s;
    return guarded([&] { *out_wm2 = etup::physics::et_depth_to_le(et_mm_day); });
}

/* ------------------------------------------------------------------ */

etu_status etu_run_open(const char* config_path, const char* const* overrides,
                        size_t n_overrides, int threads, etu_run** out) {
    if (auto s = require(out && config_path, "null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        etup::set_max_threads(threads);
        std::vector<std::string> ov;
        for (size_t i = 0; i < n_overrides; ++i) {
            if (overrides[i]) ov.emplace_back(overrides[i]);
        }
        auto run = std::make_unique<etu_run>();
        run->config = etup::run::load_run_config(config_path, ov);
        *out = run.release();
    });
}

void etu_run_close(etu_run* run) { delete run; }

const char* const* etu_config_keys(void) {
    static const std::vector<const char*> keys = [] {
        std::vector<const char*> k;
        for (const auto& key : etup::run::config_keys()) k.push_back(key.c_str());
        k.push_back(nullptr);
        return k;
    }();
    return keys.data();
}

etu_status etu_run_synth(etu_run* run, const char* out_dir) {
    if (auto s = require(run && out_dir, "null argument")) return s;
    return guarded([&] { etup::run::run_synth(run->config, out_dir); });
}

etu_status etu_run_train(etu_run* run, const char* model_path,
                         double* train_rmse_wm2, double* train_rmse_mm_day) {
    if (auto s = require(run && model_path, "null argument")) return s;
    return guarded([&] {
        auto outcome = etup::run::run_train(run->config, model_path);
        if (train_rmse_wm2) *train_rmse_wm2 = outcome.train_rmse_wm2;
        if (train_rmse_mm_day) *train_rmse_mm_day = outcome.train_rmse_mm_day;
    });
}

etu_status etu_run_cv(etu_run* run, const char* report_json_path,
                      const char* report_csv_path) {
    if (auto s = require(run, "null run handle")) return s;
    return guarded([&] {
        etup::run::run_cv(run->config,
                          report_json_path ? report_json_path : "",
                          report_csv_path ? report_csv_path : "");
    });
}

etu_status etu_run_grid_search(etu_run* run, const char* result_csv_path,
                               char** best_config_json) {
    if (auto s = require(run && best_config_json, "null argument")) return s;
    *best_config_json = nullptr;
    return guarded([&] {
        std::string best = etup::run::run_grid_search(
            run->config, result_csv_path ? result_csv_path : "");
        char* copy = static_cast<char*>(std::malloc(best.size() + 1));
        if (!copy) throw std::bad_alloc();
        std::memcpy(copy, best.c_str(), best.size() + 1);
        *best_config_json = copy;
    });
}

etu_status etu_run_predict_grid(etu_run* run, const char* model_path,
                                const char* out_dir, int write_monthly,
                                int write_csv) {
    if (auto s = require(run && model_path && out_dir, "null argument"))
        return s;
    return guarded([&] {
        etup::run::run_predict_grid(run->config, model_path, out_dir,
                                    write_monthly != 0, write_csv != 0);
    });
}

void etu_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */

etu_status etu_model_load(const char* path, etu_model** out) {
    if (auto s = require(out && path, "null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto model = std::make_unique<etu_model>();
        model->ensemble = etup::gbdt::load_model(path);
        *out = model.release();
    });
}

void etu_model_free(etu_model* model) { delete model; }

etu_status etu_model_num_features(const etu_model* model, size_t* out) {
    if (auto s = require(model && out, "null argument")) return s;
    *out = model->ensemble.schema.size();
    return ETU_OK;
}

etu_status etu_model_predict(const etu_model* model, const double* features,
                             size_t n, double* out_wm2) {
    if (auto s = require(model && features && out_wm2, "null argument"))
        return s;
    return guarded([&] {
        *out_wm2 = model->ensemble.predict({features, n});
    });
}

etu_status etu_model_importance_csv(const etu_model* model, const char* path,
                                    int top_n) {
    if (auto s = require(model && path, "null argument")) return s;
    return guarded([&] {
        auto ranked = etup::gbdt::feature_importance_gain(model->ensemble);
        if (top_n > 0 && ranked.size() > std::size_t(top_n))
            ranked.resize(std::size_t(top_n));
        etup::csv::Writer w(path);
        w.row({"feature", "gain", "splits"});
        for (const auto& fi : ranked) {
            w.row({fi.name, etup::csv::format_double(fi.gain),
                   std::to_string(fi.splits)});
        }
        w.close();
    });
}

/* ------------------------------------------------------------------ */

etu_status etu_grid_read(const char* path, etu_grid** out) {
    if (auto s = require(out && path, "null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto grid = std::make_unique<etu_grid>();
        grid->grid = etup::gridio::read_grid(path);
        *out = grid.release();
    });
}

void etu_grid_free(etu_grid* grid) { delete grid; }

etu_status etu_grid_write(const etu_grid* grid, const char* path) {
    if (auto s = require(grid && path, "null argument")) return s;
    return guarded([&] { etup::gridio::write_grid(grid->grid, path); });
}

etu_status etu_grid_convert_units(const etu_grid* grid,
                                  const char* target_unit, etu_grid** out) {
    if (auto s = require(grid && target_unit && out, "null argument")) return s;
    *out = nullptr;
    return guarded([&] {
        auto converted = std::make_unique<etu_grid>();
        converted->grid = etup::gridio::convert_units(
            grid->grid, etup::gridio::unit_from_name(target_unit));
        *out = converted.release();
    });
}

etu_status etu_grid_to_csv(const etu_grid* grid, const char* path) {
    if (auto s = require(grid && path, "null argument")) return s;
    return guarded([&] { etup::gridio::grid_to_csv(grid->grid, path); });
}

etu_status etu_grid_shape(const etu_grid* grid, size_t* n_rows,
                          size_t* n_cols) {
    if (auto s = require(grid && n_rows && n_cols, "null argument")) return s;
    *n_rows = grid->grid.spec.n_rows();
    *n_cols = grid->grid.spec.n_cols();
    return ETU_OK;
}

etu_status etu_grid_unit(const etu_grid* grid, const char** out) {
    if (auto s = require(grid && out, "null argument")) return s;
    *out = etup::gridio::unit_name(grid->grid.unit);
    return ETU_OK;
}

}  // extern "C"
