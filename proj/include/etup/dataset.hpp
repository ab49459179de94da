#pragma once

#include <string>
#include <vector>

#include "etup/dates.hpp"
#include "etup/features.hpp"

namespace etup {

// One training observation: predictors plus the flux target and the keys
// used for grouped evaluation and stratified reporting.
struct DataRow {
    features::FeatureVector x;
    double target_le = 0.0;   // W m-2
    std::string group;        // "site_id:year"
    int month = 0;            // 1..12
    int igbp = 0;
};

struct DatasetTable {
    features::FeatureSchema schema;
    std::vector<DataRow> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return schema.size(); }
};

inline std::string group_key(const std::string& site_id, const Date& date) {
    return site_id + ":" + std::to_string(date.year);
}

}  // namespace etup
