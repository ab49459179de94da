#pragma once

#include <string>
#include <vector>

#include "etup/dates.hpp"
#include "etup/eval.hpp"
#include "etup/gbdt.hpp"
#include "etup/gridio.hpp"
#include "etup/ingest.hpp"

namespace etup::run {

// One JSON document drives every batch workflow. Unknown keys are
// rejected; file paths resolve relative to the config file's directory.
struct RunConfig {
    std::uint64_t seed = 0;

    struct Data {
        std::string sites;
        std::string flux;
        std::string meteo;
        std::string reflectance;
        double qc_min = ingest::kDefaultQcMin;
    } data;

    ingest::SynthConfig synth;
    gbdt::TrainConfig train;
    int eval_k = 5;

    struct Grid {
        gridio::GridSpec spec{36.0, 49.0, -104.0, -82.0, 0.0045};
        std::vector<Date> dates;
    } grid;

    std::vector<eval::GridAxis> search;
};

// Dotted keys accepted both in the JSON document and as overrides.
const std::vector<std::string>& config_keys();

// Parses JSON text, applies "dotted.key=value" overrides (values parsed as
// JSON scalars, falling back to strings), resolves paths against base_dir.
RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir,
                           const std::vector<std::string>& overrides = {});

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides = {});

// Writes the four synthetic ingestion CSVs into out_dir.
void run_synth(const RunConfig& cfg, const std::string& out_dir);

struct TrainOutcome {
    double train_rmse_wm2 = 0.0;
    double train_rmse_mm_day = 0.0;
    std::string schema_path;
};

// Loads + joins the ingestion files, fits, saves the model and its schema
// sidecar ("<stem>.schema.json").
TrainOutcome run_train(const RunConfig& cfg, const std::string& model_path);

void run_cv(const RunConfig& cfg, const std::string& report_json_path,
            const std::string& report_csv_path);

// Returns the winning config as a JSON object string.
std::string run_grid_search(const RunConfig& cfg,
                            const std::string& result_csv_path);

struct PredictGridOutcome {
    std::vector<std::string> files;  // paths written, daily then monthly
};

// One mm_day grid per configured date; with monthly sums for every fully
// covered calendar month; optional CSV companion per file.
PredictGridOutcome run_predict_grid(const RunConfig& cfg,
                                    const std::string& model_path,
                                    const std::string& out_dir, bool monthly,
                                    bool csv);

}  // namespace etup::run
