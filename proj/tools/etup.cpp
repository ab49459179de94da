// etup — command-line front end over the etupscale C API.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etupscale.h"

namespace {

int exit_code_of(etu_status status) {
    switch (status) {
        case ETU_OK: return 0;
        case ETU_E_INVALID_INPUT:
        case ETU_E_CONFIG:
        case ETU_E_SCHEMA: return 2;
        case ETU_E_IO:
        case ETU_E_FORMAT: return 3;
        case ETU_E_EMPTY_DATA: return 4;
        case ETU_E_INVALID_K: return 5;
        default: return 1;
    }
}

int fail(etu_status status) {
    std::fprintf(stderr, "error: %s\n", etu_last_error());
    return exit_code_of(status);
}

struct RunArgs {
    std::string config_path;
    int threads = 0;
    std::map<std::string, std::string> overrides;  // dotted key -> raw value

    std::vector<std::string> override_settings() const {
        std::vector<std::string> out;
        for (const auto& [key, value] : overrides)
            out.push_back(key + "=" + value);
        return out;
    }
};

// Registers --config, --threads and one flag per dotted config key.
void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run config JSON file")
        ->required();
    cmd->add_option("--threads", args.threads,
                    "cap worker threads (0 = hardware default)");
    for (const char* const* key = etu_config_keys(); *key; ++key) {
        std::string name = *key;
        cmd->add_option_function<std::string>(
               "--" + name,
               [&args, name](const std::string& value) {
                   args.overrides[name] = value;
               },
               "override config key " + name)
            ->group("Config overrides");
    }
}

struct RunHandle {
    etu_run* run = nullptr;
    ~RunHandle() { etu_run_close(run); }
};

etu_status open_run(const RunArgs& args, RunHandle& handle) {
    int threads = args.threads;
    if (threads == 0) {
        if (const char* env = std::getenv("ET_UPSCALE_THREADS"))
            threads = std::atoi(env);
    }
    auto settings = args.override_settings();
    std::vector<const char*> ptrs;
    for (const auto& s : settings) ptrs.push_back(s.c_str());
    return etu_run_open(args.config_path.c_str(), ptrs.data(), ptrs.size(),
                        threads, &handle.run);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-guided ET upscaling: synthetic data, training, "
                 "grouped cross-validation, and gridded inference"};
    app.require_subcommand(1);

    // synth ---------------------------------------------------------
    RunArgs synth_args;
    std::string synth_out_dir = "data";
    auto* synth = app.add_subcommand(
        "synth", "write a synthetic ingestion dataset (four CSV files)");
    add_run_options(synth, synth_args);
    synth->add_option("-o,--out-dir", synth_out_dir, "output directory");

    // train ---------------------------------------------------------
    RunArgs train_args;
    std::string train_model_path = "model.json";
    auto* train = app.add_subcommand("train", "fit a model on the configured "
                                              "ingestion files");
    add_run_options(train, train_args);
    train->add_option("-o,--out", train_model_path, "model file to write");

    // cv ------------------------------------------------------------
    RunArgs cv_args;
    std::string cv_json = "cv_report.json";
    std::string cv_csv = "cv_report.csv";
    auto* cv = app.add_subcommand(
        "cv", "grouped k-fold cross-validation by site-year");
    add_run_options(cv, cv_args);
    cv->add_option("--out-json", cv_json, "report JSON path");
    cv->add_option("--out-csv", cv_csv, "report CSV path");

    // grid-search ---------------------------------------------------
    RunArgs gs_args;
    std::string gs_csv = "grid_search.csv";
    auto* gs = app.add_subcommand(
        "grid-search", "exhaustive hyperparameter search via grouped CV");
    add_run_options(gs, gs_args);
    gs->add_option("-o,--out", gs_csv, "result table CSV path");

    // predict-grid --------------------------------------------------
    RunArgs pg_args;
    std::string pg_model, pg_out_dir = "grids";
    bool pg_monthly = false, pg_csv = false;
    auto* pg = app.add_subcommand(
        "predict-grid", "run gridded inference for the configured dates");
    add_run_options(pg, pg_args);
    pg->add_option("-m,--model", pg_model, "trained model file")->required();
    pg->add_option("-o,--out-dir", pg_out_dir, "output directory");
    pg->add_flag("--monthly", pg_monthly,
                 "also write monthly sums for fully covered months");
    pg->add_flag("--csv", pg_csv, "write a CSV companion per grid");

    // importance ----------------------------------------------------
    std::string imp_model, imp_out = "importance.csv";
    int imp_top = 15;
    auto* imp = app.add_subcommand("importance",
                                   "export gain-based feature importance");
    imp->add_option("-m,--model", imp_model, "trained model file")->required();
    imp->add_option("-o,--out", imp_out, "importance CSV path");
    imp->add_option("--top", imp_top, "keep the top N features (0 = all)");

    // convert -------------------------------------------------------
    std::string conv_in, conv_unit, conv_out, conv_csv_out;
    auto* conv = app.add_subcommand("convert",
                                    "convert or export an ETGRID file");
    conv->add_option("-i,--in", conv_in, "input .etg file")->required();
    conv->add_option("--to", conv_unit, "target unit (W_m2 or mm_day)");
    conv->add_option("-o,--out", conv_out, "output .etg file");
    conv->add_option("--csv", conv_csv_out, "export cells as CSV");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        RunHandle h;
        if (auto s = open_run(synth_args, h)) return fail(s);
        if (auto s = etu_run_synth(h.run, synth_out_dir.c_str()))
            return fail(s);
        std::printf("wrote sites.csv, flux.csv, meteo.csv, reflectance.csv "
                    "to %s\n",
                    synth_out_dir.c_str());
        return 0;
    }

    if (train->parsed()) {
        RunHandle h;
        if (auto s = open_run(train_args, h)) return fail(s);
        double rmse_wm2 = 0.0, rmse_mm = 0.0;
        if (auto s = etu_run_train(h.run, train_model_path.c_str(), &rmse_wm2,
                                   &rmse_mm))
            return fail(s);
        std::printf("model: %s\n", train_model_path.c_str());
        std::printf("training RMSE: %.4f W/m2 (%.4f mm/day)\n", rmse_wm2,
                    rmse_mm);
        return 0;
    }

    if (cv->parsed()) {
        RunHandle h;
        if (auto s = open_run(cv_args, h)) return fail(s);
        if (auto s = etu_run_cv(h.run, cv_json.c_str(), cv_csv.c_str()))
            return fail(s);
        std::printf("wrote %s and %s\n", cv_json.c_str(), cv_csv.c_str());
        return 0;
    }

    if (gs->parsed()) {
        RunHandle h;
        if (auto s = open_run(gs_args, h)) return fail(s);
        char* best = nullptr;
        if (auto s = etu_run_grid_search(h.run, gs_csv.c_str(), &best))
            return fail(s);
        std::printf("best config: %s\n", best);
        std::printf("result table: %s\n", gs_csv.c_str());
        etu_string_free(best);
        return 0;
    }

    if (pg->parsed()) {
        RunHandle h;
        if (auto s = open_run(pg_args, h)) return fail(s);
        if (auto s = etu_run_predict_grid(h.run, pg_model.c_str(),
                                          pg_out_dir.c_str(),
                                          pg_monthly ? 1 : 0, pg_csv ? 1 : 0))
            return fail(s);
        std::printf("grids written to %s\n", pg_out_dir.c_str());
        return 0;
    }

    if (imp->parsed()) {
        etu_model* model = nullptr;
        if (auto s = etu_model_load(imp_model.c_str(), &model)) return fail(s);
        auto s = etu_model_importance_csv(model, imp_out.c_str(), imp_top);
        etu_model_free(model);
        if (s) return fail(s);
        std::printf("wrote %s\n", imp_out.c_str());
        return 0;
    }

    if (conv->parsed()) {
        if (conv_out.empty() && conv_csv_out.empty()) {
            std::fprintf(stderr, "error: convert needs --out and/or --csv\n");
            return 2;
        }
        if (!conv_out.empty() && conv_unit.empty()) {
            std::fprintf(stderr, "error: --out requires --to <unit>\n");
            return 2;
        }
        etu_grid* grid = nullptr;
        if (auto s = etu_grid_read(conv_in.c_str(), &grid)) return fail(s);
        std::unique_ptr<etu_grid, decltype(&etu_grid_free)> guard(
            grid, &etu_grid_free);
        if (!conv_out.empty()) {
            etu_grid* converted = nullptr;
            if (auto s = etu_grid_convert_units(grid, conv_unit.c_str(),
                                                &converted))
                return fail(s);
            auto s = etu_grid_write(converted, conv_out.c_str());
            etu_grid_free(converted);
            if (s) return fail(s);
            std::printf("wrote %s\n", conv_out.c_str());
        }
        if (!conv_csv_out.empty()) {
            if (auto s = etu_grid_to_csv(grid, conv_csv_out.c_str()))
                return fail(s);
            std::printf("wrote %s\n", conv_csv_out.c_str());
        }
        return 0;
    }

    return 0;
}
