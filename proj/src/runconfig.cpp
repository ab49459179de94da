#include "etup/runconfig.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/physics.hpp"

namespace etup::run {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kTrainParams = {
    "mode",       "growth",   "n_estimators", "learning_rate",
    "num_leaves", "max_depth", "min_child_weight", "min_gain",
    "colsample",  "subsample", "max_bins",    "seed"};

void reject_unknown_keys(const ordered_json& obj,
                         const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key))
            throw_config("unknown config key '" +
                         (where.empty() ? key : where + "." + key) + "'");
    }
}

std::string json_scalar_to_string(const ordered_json& v,
                                  const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned())
        return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return csv::format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw_config("expected a scalar at '" + where + "'");
}

void apply_override(ordered_json& doc, const std::string& setting) {
    auto eq = setting.find('=');
    if (eq == std::string::npos || eq == 0)
        throw_config("override must look like key=value: '" + setting + "'");
    std::string key = setting.substr(0, eq);
    std::string value = setting.substr(eq + 1);

    ordered_json parsed;
    try {
        parsed = ordered_json::parse(value);
    } catch (const nlohmann::json::exception&) {
        parsed = value;  // plain string (e.g. a path or ISO date)
    }

    ordered_json* node = &doc;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot - start);
        if (part.empty()) throw_config("bad override key '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = parsed;
            break;
        }
        node = &(*node)[part];
        if (!node->is_object() && !node->is_null())
            throw_config("override key '" + key + "' crosses a non-object");
        start = dot + 1;
    }
}

template <typename T>
void read_field(const ordered_json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw_config(std::string("bad value for config key '") + key + "'");
    }
}

std::string resolve_path(const std::string& path, const std::string& base) {
    if (path.empty() || base.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base) / p).lexically_normal().string();
}

std::vector<Date> parse_dates(const ordered_json& spec) {
    std::vector<Date> out;
    if (spec.is_array()) {
        for (const auto& d : spec) out.push_back(parse_date(d.get<std::string>()));
    } else if (spec.is_object()) {
        for (const auto& [key, value] : spec.items())
            if (key != "start" && key != "end")
                throw_config("unknown config key 'grid.dates." + key + "'");
        Date start = parse_date(spec.at("start").get<std::string>());
        Date end = parse_date(spec.at("end").get<std::string>());
        if (end < start) throw_config("grid.dates: end before start");
        for (Date d = start; !(end < d); d = add_days(d, 1)) out.push_back(d);
    } else {
        throw_config("grid.dates must be an array or {start, end}");
    }
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = {
            "seed",
            "data.sites", "data.flux", "data.meteo", "data.reflectance",
            "data.qc_min",
            "synth.n_sites", "synth.years", "synth.start_year",
            "synth.day_step", "synth.noise_sigma",
            "eval.k",
            "grid.lat_min", "grid.lat_max", "grid.lon_min", "grid.lon_max",
            "grid.cell_deg", "grid.dates",
        };
        for (const auto& p : kTrainParams) {
            k.push_back("train." + p);
            k.push_back("search." + p);
        }
        return k;
    }();
    return keys;
}

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir,
                           const std::vector<std::string>& overrides) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw_config(std::string("bad config json: ") + e.what());
    }
    if (!doc.is_object()) throw_config("config must be a JSON object");

    for (const auto& setting : overrides) apply_override(doc, setting);

    reject_unknown_keys(
        doc, {"seed", "data", "synth", "train", "eval", "grid", "search"}, "");

    RunConfig cfg;
    read_field(doc, "seed", cfg.seed);
    cfg.synth.seed = cfg.seed;
    cfg.train.seed = cfg.seed;

    if (doc.contains("data")) {
        const auto& d = doc.at("data");
        reject_unknown_keys(
            d, {"sites", "flux", "meteo", "reflectance", "qc_min"}, "data");
        read_field(d, "sites", cfg.data.sites);
        read_field(d, "flux", cfg.data.flux);
        read_field(d, "meteo", cfg.data.meteo);
        read_field(d, "reflectance", cfg.data.reflectance);
        read_field(d, "qc_min", cfg.data.qc_min);
        cfg.data.sites = resolve_path(cfg.data.sites, base_dir);
        cfg.data.flux = resolve_path(cfg.data.flux, base_dir);
        cfg.data.meteo = resolve_path(cfg.data.meteo, base_dir);
        cfg.data.reflectance = resolve_path(cfg.data.reflectance, base_dir);
    }

    if (doc.contains("synth")) {
        const auto& s = doc.at("synth");
        reject_unknown_keys(
            s, {"n_sites", "years", "start_year", "day_step", "noise_sigma"},
            "synth");
        read_field(s, "n_sites", cfg.synth.n_sites);
        read_field(s, "years", cfg.synth.years);
        read_field(s, "start_year", cfg.synth.start_year);
        read_field(s, "day_step", cfg.synth.day_step);
        read_field(s, "noise_sigma", cfg.synth.noise_sigma);
    }

    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        reject_unknown_keys(
            t, std::set<std::string>(kTrainParams.begin(), kTrainParams.end()),
            "train");
        for (const auto& param : kTrainParams) {
            if (!t.contains(param)) continue;
            eval::apply_config_setting(
                cfg.train, param,
                json_scalar_to_string(t.at(param), "train." + param));
        }
    }

    if (doc.contains("eval")) {
        const auto& e = doc.at("eval");
        reject_unknown_keys(e, {"k"}, "eval");
        read_field(e, "k", cfg.eval_k);
    }

    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        reject_unknown_keys(g,
                            {"lat_min", "lat_max", "lon_min", "lon_max",
                             "cell_deg", "dates"},
                            "grid");
        read_field(g, "lat_min", cfg.grid.spec.lat_min);
        read_field(g, "lat_max", cfg.grid.spec.lat_max);
        read_field(g, "lon_min", cfg.grid.spec.lon_min);
        read_field(g, "lon_max", cfg.grid.spec.lon_max);
        read_field(g, "cell_deg", cfg.grid.spec.cell_deg);
        if (g.contains("dates")) cfg.grid.dates = parse_dates(g.at("dates"));
    }

    if (doc.contains("search")) {
        const auto& s = doc.at("search");
        if (!s.is_object()) throw_config("search must be an object");
        std::set<std::string> known(kTrainParams.begin(), kTrainParams.end());
        for (const auto& [param, values] : s.items()) {
            if (!known.count(param))
                throw_config("unknown config key 'search." + param + "'");
            if (!values.is_array())
                throw_config("search." + param + " must be an array");
            eval::GridAxis axis;
            axis.param = param;
            for (const auto& v : values)
                axis.values.push_back(
                    json_scalar_to_string(v, "search." + param));
            cfg.search.push_back(std::move(axis));
        }
    }

    return cfg;
}

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
    std::ifstream in(config_path);
    if (!in) throw_io("cannot open config '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string base = fs::path(config_path).parent_path().string();
    return parse_run_config(buf.str(), base, overrides);
}

void run_synth(const RunConfig& cfg, const std::string& out_dir) {
    ingest::write_synth_csvs(cfg.synth, out_dir);
}

namespace {

struct LoadedInputs {
    std::vector<ingest::SiteMeta> sites;
    std::vector<features::MeteoWindow> windows;
    ingest::ReflectanceLoad refl;
};

LoadedInputs load_inputs(const RunConfig& cfg) {
    LoadedInputs in;
    in.sites = ingest::load_sites(cfg.data.sites);
    in.windows = ingest::load_meteo_windows(cfg.data.meteo);
    if (!cfg.data.reflectance.empty())
        in.refl = ingest::load_reflectance(cfg.data.reflectance);
    for (const auto& warning : in.refl.warnings)
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
    return in;
}

DatasetTable load_training_table(const RunConfig& cfg) {
    LoadedInputs in = load_inputs(cfg);
    auto flux = ingest::load_flux(cfg.data.flux, cfg.data.qc_min);
    ingest::JoinStats stats;
    DatasetTable table =
        ingest::join_dataset(in.sites, flux, in.windows, in.refl,
                             features::FeatureSchema::current(), &stats);
    if (stats.dropped_no_window > 0)
        std::fprintf(stderr, "note: dropped %zu flux rows without windows\n",
                     stats.dropped_no_window);
    if (table.rows.empty())
        throw Error(ErrorCode::empty_data, "joined dataset is empty");
    return table;
}

std::string schema_sidecar_path(const std::string& model_path) {
    fs::path p(model_path);
    fs::path sidecar = p.parent_path() / (p.stem().string() + ".schema.json");
    return sidecar.string();
}

}  // namespace

TrainOutcome run_train(const RunConfig& cfg, const std::string& model_path) {
    DatasetTable table = load_training_table(cfg);
    gbdt::Ensemble model = gbdt::fit(table, cfg.train);
    gbdt::save_model(model, model_path);

    TrainOutcome out;
    out.schema_path = schema_sidecar_path(model_path);
    {
        std::ofstream sidecar(out.schema_path, std::ios::binary);
        if (!sidecar) throw_io("cannot write '" + out.schema_path + "'");
        sidecar << model.schema.to_json() << '\n';
    }

    std::vector<double> pred = gbdt::predict_table(model, table);
    std::vector<double> truth(table.n_rows());
    for (std::size_t i = 0; i < truth.size(); ++i)
        truth[i] = table.rows[i].target_le;
    eval::Metrics m = eval::metrics(truth, pred);
    out.train_rmse_wm2 = m.rmse;
    out.train_rmse_mm_day = m.rmse * physics::kLeToEtFactor;
    return out;
}

void run_cv(const RunConfig& cfg, const std::string& report_json_path,
            const std::string& report_csv_path) {
    DatasetTable table = load_training_table(cfg);
    eval::EvalReport report = eval::cross_validate(table, cfg.train, cfg.eval_k);
    if (!report_json_path.empty()) {
        std::ofstream out(report_json_path, std::ios::binary);
        if (!out) throw_io("cannot write '" + report_json_path + "'");
        out << report.to_json() << '\n';
    }
    if (!report_csv_path.empty()) report.write_csv(report_csv_path);
}

std::string run_grid_search(const RunConfig& cfg,
                            const std::string& result_csv_path) {
    if (cfg.search.empty()) throw_config("config has no search section");
    DatasetTable table = load_training_table(cfg);
    eval::GridSearchResult result =
        eval::grid_search(table, cfg.train, cfg.search, cfg.eval_k);

    if (!result_csv_path.empty()) {
        csv::Writer w(result_csv_path);
        w.row({"rank_order", "settings", "rmse_wm2", "rmse_se_wm2", "mae_wm2",
               "r2", "best"});
        for (std::size_t i = 0; i < result.points.size(); ++i) {
            const auto& p = result.points[i];
            w.row({std::to_string(i), p.label,
                   csv::format_double(p.report.rmse.mean),
                   csv::format_double(p.report.rmse.se),
                   csv::format_double(p.report.mae.mean),
                   csv::format_double(p.report.r2.mean),
                   i == result.best ? "1" : "0"});
        }
        w.close();
    }

    const auto& best = result.points[result.best].config;
    ordered_json j;
    j["mode"] = gbdt::mode_name(best.mode);
    j["growth"] = gbdt::growth_name(best.growth);
    j["n_estimators"] = best.n_estimators;
    j["learning_rate"] = best.learning_rate;
    j["num_leaves"] = best.num_leaves;
    j["max_depth"] = best.max_depth;
    j["min_child_weight"] = best.min_child_weight;
    j["min_gain"] = best.min_gain;
    j["colsample"] = best.colsample;
    j["subsample"] = best.subsample;
    j["max_bins"] = best.max_bins;
    j["seed"] = best.seed;
    return j.dump();
}

namespace {

// Registers every input site into its covering grid cell; inference then
// reads each cell's inputs directly, with no resampling.
class SiteCellProvider {
public:
    SiteCellProvider(const gridio::GridSpec& spec, LoadedInputs inputs,
                     const features::FeatureSchema& schema)
        : spec_(spec), inputs_(std::move(inputs)), schema_(schema) {
        for (const auto& site : inputs_.sites) {
            auto cell = cell_of(site.lat, site.lon);
            if (!cell) continue;  // outside the grid
            auto [it, inserted] = cell_site_.emplace(*cell, &site);
            if (!inserted)
                throw_invalid("sites '" + it->second->site_id + "' and '" +
                              site.site_id + "' fall into the same grid cell");
        }
        for (const auto& w : inputs_.windows)
            window_by_key_[{w.site_id, w.date}] = &w;
    }

    gridio::FeatureProvider provider() const {
        gridio::FeatureProvider p;
        p.schema_fingerprint = schema_.fingerprint();
        p.get = [this](double lat, double lon, const Date& date) {
            return lookup(lat, lon, date);
        };
        return p;
    }

private:
    std::optional<std::pair<long, long>> cell_of(double lat, double lon) const {
        double r = (spec_.lat_max - lat) / spec_.cell_deg - 0.5;
        double c = (lon - spec_.lon_min) / spec_.cell_deg - 0.5;
        long row = std::lround(r);
        long col = std::lround(c);
        if (row < 0 || col < 0 || row >= long(spec_.n_rows()) ||
            col >= long(spec_.n_cols()))
            return std::nullopt;
        return std::make_pair(row, col);
    }

    std::optional<features::FeatureVector> lookup(double lat, double lon,
                                                  const Date& date) const {
        auto cell = cell_of(lat, lon);
        if (!cell) return std::nullopt;
        auto site_it = cell_site_.find(*cell);
        if (site_it == cell_site_.end()) return std::nullopt;
        const ingest::SiteMeta& site = *site_it->second;

        auto win_it = window_by_key_.find({site.site_id, date});
        if (win_it == window_by_key_.end()) return std::nullopt;

        std::optional<features::ReflectanceSample> sample;
        auto refl_it = inputs_.refl.samples.find({site.site_id, date});
        if (refl_it != inputs_.refl.samples.end()) sample = refl_it->second;

        int doy = day_of_year(date);
        physics::GeoTime geo{site.lat, site.lon, double(doy)};
        return features::assemble_features(*win_it->second, sample, geo,
                                           site.igbp, doy, schema_);
    }

    gridio::GridSpec spec_;
    LoadedInputs inputs_;
    features::FeatureSchema schema_;
    std::map<std::pair<long, long>, const ingest::SiteMeta*> cell_site_;
    std::map<std::pair<std::string, Date>, const features::MeteoWindow*>
        window_by_key_;
};

}  // namespace

PredictGridOutcome run_predict_grid(const RunConfig& cfg,
                                    const std::string& model_path,
                                    const std::string& out_dir, bool monthly,
                                    bool csv_export) {
    if (cfg.grid.dates.empty())
        throw_config("grid.dates is empty; nothing to predict");
    cfg.grid.spec.validate();

    gbdt::Ensemble model = gbdt::load_model(model_path);
    SiteCellProvider cells(cfg.grid.spec, load_inputs(cfg), model.schema);
    gridio::FeatureProvider provider = cells.provider();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw_io("cannot create directory '" + out_dir + "'");

    PredictGridOutcome out;
    auto emit = [&](const gridio::EtGrid& grid, bool is_monthly) {
        fs::path path =
            fs::path(out_dir) / gridio::grid_file_name(grid.date, is_monthly);
        gridio::write_grid(grid, path.string());
        out.files.push_back(path.string());
        if (csv_export) {
            fs::path csv_path = path;
            csv_path.replace_extension(".csv");
            gridio::grid_to_csv(grid, csv_path.string());
            out.files.push_back(csv_path.string());
        }
    };

    std::map<std::pair<int, unsigned>, std::vector<gridio::EtGrid>> by_month;
    for (const Date& date : cfg.grid.dates) {
        gridio::EtGrid wm2 =
            gridio::predict_grid(model, provider, cfg.grid.spec, date);
        gridio::EtGrid daily = gridio::convert_units(wm2, gridio::Unit::mm_day);
        emit(daily, false);
        if (monthly) by_month[{date.year, date.month}].push_back(std::move(daily));
    }

    for (const auto& [ym, grids] : by_month) {
        if (int(grids.size()) != days_in_month(ym.first, ym.second)) {
            std::fprintf(stderr,
                         "note: %04d-%02u has %zu of %d days, skipping "
                         "monthly sum\n",
                         ym.first, ym.second, grids.size(),
                         days_in_month(ym.first, ym.second));
            continue;
        }
        emit(gridio::monthly_aggregate(grids, true), true);
    }
    return out;
}

}  // namespace etup::run
