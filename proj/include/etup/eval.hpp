#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "etup/dataset.hpp"
#include "etup/gbdt.hpp"

namespace etup::eval {

struct Metrics {
    double mae = 0.0;   // W m-2
    double rmse = 0.0;  // W m-2
    double r2 = 0.0;    // NaN when the target has zero variance
};

Metrics metrics(std::span<const double> y_true, std::span<const double> y_pred);

struct FoldPlan {
    int k = 0;
    std::map<std::string, int> assignment;  // group key -> fold index
};

// Deterministic size-balancing: distinct groups sorted by descending row
// count (ties by key), each assigned to the currently smallest fold.
FoldPlan group_kfold(std::span<const std::string> groups, int k);

// Mean and standard error of one statistic across the folds where its
// stratum was present.
struct StratumStat {
    double mean = 0.0;
    double se = 0.0;   // sample-std / sqrt(n); NaN when n < 2
    int n_folds = 0;
};

struct EvalReport {
    int k = 0;
    std::vector<Metrics> folds;
    StratumStat mae;
    StratumStat rmse;
    StratumStat r2;
    std::map<int, StratumStat> month_rmse;  // month 1..12
    std::map<int, StratumStat> igbp_rmse;   // IGBP code

    // W m-2 -> mm day-1 companions use the fixed 0.0864/2.45 factor.
    std::string to_json() const;
    void write_csv(const std::string& path) const;
};

// Grouped k-fold cross-validation by site-year: train on k-1 folds,
// evaluate the held-out fold, stratify RMSE by month and IGBP inside each
// validation set, then average across folds.
EvalReport cross_validate(const DatasetTable& table,
                          const gbdt::TrainConfig& config, int k);

struct GridPoint {
    gbdt::TrainConfig config;
    std::string label;  // "param=value ..." in grid order
    EvalReport report;
};

struct GridSearchResult {
    std::vector<GridPoint> points;  // in enumeration order
    std::size_t best = 0;           // lowest aggregate RMSE, earliest wins ties
};

// Exhaustive cartesian product over per-parameter value lists. Axis order
// follows the axes vector; values in listed order.
struct GridAxis {
    std::string param;
    std::vector<std::string> values;  // parsed per parameter type
};

GridSearchResult grid_search(const DatasetTable& table,
                             const gbdt::TrainConfig& base,
                             const std::vector<GridAxis>& axes, int k);

// Applies one "param=value" setting onto a config; throws a config error
// for unknown names or unparseable values.
void apply_config_setting(gbdt::TrainConfig& config, const std::string& param,
                          const std::string& value);

}  // namespace etup::eval
