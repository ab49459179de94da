#include "etup/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/physics.hpp"

namespace etup::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rmse_of(std::span<const double> y_true, std::span<const double> y_pred,
               std::span<const std::size_t> idx) {
    double sq = 0.0;
    for (auto i : idx) {
        double d = y_pred[i] - y_true[i];
        sq += d * d;
    }
    return std::sqrt(sq / double(idx.size()));
}

StratumStat stat_over_folds(const std::vector<double>& values) {
    StratumStat s;
    s.n_folds = int(values.size());
    if (values.empty()) {
        s.mean = kNaN;
        s.se = kNaN;
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / double(values.size());
    if (values.size() < 2) {
        s.se = kNaN;
        return s;
    }
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(sq / double(values.size() - 1)) /
           std::sqrt(double(values.size()));
    return s;
}

}  // namespace

Metrics metrics(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size())
        throw_invalid("metrics: length mismatch");
    if (y_true.empty()) throw_invalid("metrics: empty vectors");
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (!std::isfinite(y_true[i]) || !std::isfinite(y_pred[i]))
            throw_invalid("metrics: non-finite entry");
    }

    const double n = double(y_true.size());
    double abs_sum = 0.0, sq_sum = 0.0, y_sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        double d = y_pred[i] - y_true[i];
        abs_sum += std::abs(d);
        sq_sum += d * d;
        y_sum += y_true[i];
    }
    double y_mean = y_sum / n;
    double ss_tot = 0.0;
    for (double y : y_true) ss_tot += (y - y_mean) * (y - y_mean);

    Metrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    m.r2 = ss_tot > 0.0 ? 1.0 - sq_sum / ss_tot : kNaN;
    return m;
}

FoldPlan group_kfold(std::span<const std::string> groups, int k) {
    if (k < 2) throw Error(ErrorCode::invalid_k, "k must be >= 2");

    std::map<std::string, std::size_t> counts;
    for (const auto& g : groups) ++counts[g];
    if (int(counts.size()) < k)
        throw Error(ErrorCode::invalid_k,
                    "k=" + std::to_string(k) + " exceeds the " +
                        std::to_string(counts.size()) + " distinct groups");

    // Largest group first; ties by key so the plan is reproducible.
    std::vector<std::pair<std::string, std::size_t>> order(counts.begin(),
                                                           counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    FoldPlan plan;
    plan.k = k;
    std::vector<std::size_t> fold_sizes(std::size_t(k), 0);
    for (const auto& [group, count] : order) {
        std::size_t target = 0;
        for (std::size_t f = 1; f < fold_sizes.size(); ++f)
            if (fold_sizes[f] < fold_sizes[target]) target = f;
        plan.assignment[group] = int(target);
        fold_sizes[target] += count;
    }
    return plan;
}

EvalReport cross_validate(const DatasetTable& table,
                          const gbdt::TrainConfig& config, int k) {
    if (table.rows.empty())
        throw Error(ErrorCode::empty_data, "empty dataset");

    std::vector<std::string> groups;
    groups.reserve(table.rows.size());
    for (const auto& r : table.rows) groups.push_back(r.group);
    FoldPlan plan = group_kfold(groups, k);

    EvalReport report;
    report.k = k;

    std::vector<double> fold_mae, fold_rmse, fold_r2;
    std::map<int, std::vector<double>> month_vals, igbp_vals;

    for (int fold = 0; fold < k; ++fold) {
        DatasetTable train;
        train.schema = table.schema;
        std::vector<std::size_t> val_rows;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (plan.assignment.at(table.rows[i].group) == fold)
                val_rows.push_back(i);
            else
                train.rows.push_back(table.rows[i]);
        }
        if (val_rows.empty() || train.rows.empty())
            throw Error(ErrorCode::invalid_k,
                        "fold " + std::to_string(fold) + " is degenerate");

        gbdt::Ensemble model = gbdt::fit(train, config);

        std::vector<double> y_true(val_rows.size()), y_pred(val_rows.size());
        for (std::size_t j = 0; j < val_rows.size(); ++j) {
            y_true[j] = table.rows[val_rows[j]].target_le;
            y_pred[j] = model.predict(table.rows[val_rows[j]].x);
        }
        Metrics m = metrics(y_true, y_pred);
        report.folds.push_back(m);
        fold_mae.push_back(m.mae);
        fold_rmse.push_back(m.rmse);
        fold_r2.push_back(m.r2);

        // Per-stratum RMSE inside this fold's validation set. y_* indices
        // are positions within val_rows here.
        std::map<int, std::vector<std::size_t>> by_month, by_igbp;
        for (std::size_t j = 0; j < val_rows.size(); ++j) {
            by_month[table.rows[val_rows[j]].month].push_back(j);
            by_igbp[table.rows[val_rows[j]].igbp].push_back(j);
        }
        for (const auto& [month, idx] : by_month)
            month_vals[month].push_back(rmse_of(y_true, y_pred, idx));
        for (const auto& [code, idx] : by_igbp)
            igbp_vals[code].push_back(rmse_of(y_true, y_pred, idx));
    }

    report.mae = stat_over_folds(fold_mae);
    report.rmse = stat_over_folds(fold_rmse);
    report.r2 = stat_over_folds(fold_r2);
    for (const auto& [month, vals] : month_vals)
        report.month_rmse[month] = stat_over_folds(vals);
    for (const auto& [code, vals] : igbp_vals)
        report.igbp_rmse[code] = stat_over_folds(vals);
    return report;
}

namespace {

double to_mm(double wm2) { return wm2 * physics::kLeToEtFactor; }

nlohmann::ordered_json stat_json(const StratumStat& s, bool convert) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["se"] = s.se;
    j["n_folds"] = s.n_folds;
    if (convert) {
        j["mean_mm_day"] = to_mm(s.mean);
        j["se_mm_day"] = to_mm(s.se);
    }
    return j;
}

}  // namespace

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["k"] = k;
    auto& folds_j = j["folds"] = nlohmann::ordered_json::array();
    for (const auto& m : folds) {
        folds_j.push_back({{"mae_wm2", m.mae},
                           {"rmse_wm2", m.rmse},
                           {"r2", m.r2},
                           {"mae_mm_day", to_mm(m.mae)},
                           {"rmse_mm_day", to_mm(m.rmse)}});
    }
    j["aggregate"] = {{"mae_wm2", stat_json(mae, true)},
                      {"rmse_wm2", stat_json(rmse, true)},
                      {"r2", stat_json(r2, false)}};
    auto& months = j["month_rmse_wm2"] = nlohmann::ordered_json::object();
    for (const auto& [month, s] : month_rmse)
        months[std::to_string(month)] = stat_json(s, true);
    auto& igbp = j["igbp_rmse_wm2"] = nlohmann::ordered_json::object();
    for (const auto& [code, s] : igbp_rmse) {
        auto name = features::igbp_name(code);
        igbp[name ? *name : std::to_string(code)] = stat_json(s, true);
    }
    return j.dump(1, '\t');
}

void EvalReport::write_csv(const std::string& path) const {
    csv::Writer w(path);
    w.row({"level", "fold", "stratum", "mae_wm2", "rmse_wm2", "r2",
           "rmse_mm_day", "se_rmse_wm2", "n_folds"});
    auto num = [](double v) { return csv::format_double(v); };

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& m = folds[f];
        w.row({"fold", std::to_string(f), "", num(m.mae), num(m.rmse),
               num(m.r2), num(to_mm(m.rmse)), "", ""});
    }
    w.row({"aggregate", "", "", num(mae.mean), num(rmse.mean), num(r2.mean),
           num(to_mm(rmse.mean)), num(rmse.se), std::to_string(k)});
    for (const auto& [month, s] : month_rmse) {
        w.row({"month", "", std::to_string(month), "", num(s.mean), "",
               num(to_mm(s.mean)), num(s.se), std::to_string(s.n_folds)});
    }
    for (const auto& [code, s] : igbp_rmse) {
        auto name = features::igbp_name(code);
        w.row({"igbp", "", name ? *name : std::to_string(code), "",
               num(s.mean), "", num(to_mm(s.mean)), num(s.se),
               std::to_string(s.n_folds)});
    }
    w.close();
}

void apply_config_setting(gbdt::TrainConfig& config, const std::string& param,
                          const std::string& value) {
    auto as_int = [&]() {
        try {
            return std::stoi(value);
        } catch (...) {
            throw_config("bad integer for " + param + ": '" + value + "'");
        }
    };
    auto as_double = [&]() {
        try {
            return std::stod(value);
        } catch (...) {
            throw_config("bad number for " + param + ": '" + value + "'");
        }
    };

    if (param == "mode") config.mode = gbdt::mode_from_name(value);
    else if (param == "growth") config.growth = gbdt::growth_from_name(value);
    else if (param == "n_estimators") config.n_estimators = as_int();
    else if (param == "learning_rate") config.learning_rate = as_double();
    else if (param == "num_leaves") config.num_leaves = as_int();
    else if (param == "max_depth") config.max_depth = as_int();
    else if (param == "min_child_weight") config.min_child_weight = as_int();
    else if (param == "min_gain") config.min_gain = as_double();
    else if (param == "colsample") config.colsample = as_double();
    else if (param == "subsample") config.subsample = as_double();
    else if (param == "max_bins") config.max_bins = as_int();
    else if (param == "seed") config.seed = std::uint64_t(std::stoull(value));
    else throw_config("unknown hyperparameter '" + param + "'");
}

GridSearchResult grid_search(const DatasetTable& table,
                             const gbdt::TrainConfig& base,
                             const std::vector<GridAxis>& axes, int k) {
    if (axes.empty()) throw_config("empty hyperparameter grid");
    for (const auto& axis : axes)
        if (axis.values.empty())
            throw_config("empty value list for '" + axis.param + "'");

    GridSearchResult result;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        gbdt::TrainConfig cfg = base;
        std::ostringstream label;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            apply_config_setting(cfg, axes[a].param, axes[a].values[idx[a]]);
            if (a) label << ' ';
            label << axes[a].param << '=' << axes[a].values[idx[a]];
        }
        GridPoint point;
        point.config = cfg;
        point.label = label.str();
        point.report = cross_validate(table, cfg, k);
        result.points.push_back(std::move(point));

        // Odometer increment, last axis fastest.
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].values.size()) break;
            idx[a] = 0;
            if (a == 0) {
                a = axes.size() + 1;  // overflowed the first axis: done
                break;
            }
        }
        if (a == axes.size() + 1) break;
    }

    for (std::size_t i = 1; i < result.points.size(); ++i) {
        if (result.points[i].report.rmse.mean <
            result.points[result.best].report.rmse.mean)
            result.best = i;
    }
    return result;
}

}  // namespace etup::eval
