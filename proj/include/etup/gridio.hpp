#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "etup/dates.hpp"
#include "etup/features.hpp"
#include "etup/gbdt.hpp"

namespace etup::gridio {

enum class Unit { wm2, mm_day, mm_month };

const char* unit_name(Unit u);
Unit unit_from_name(const std::string& s);

// Regular geographic grid. Row 0 is the northernmost row, column 0 the
// westernmost column; cell centers are offset half a cell from the edges.
struct GridSpec {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
    double cell_deg = 0.0045;  // ~500 m of latitude

    std::size_t n_rows() const;
    std::size_t n_cols() const;
    double center_lat(std::size_t row) const;
    double center_lon(std::size_t col) const;
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

struct EtGrid {
    GridSpec spec;
    Date date;
    Unit unit = Unit::wm2;
    std::vector<float> values;  // row-major, n_rows * n_cols, NaN = fill

    float& at(std::size_t row, std::size_t col);
    float at(std::size_t row, std::size_t col) const;
};

EtGrid make_grid(const GridSpec& spec, const Date& date, Unit unit);

// Supplies the predictor vector for a cell center, or nothing when the
// cell has no registered inputs. The fingerprint must match the model's
// schema; it is checked before any cell is evaluated.
struct FeatureProvider {
    std::uint64_t schema_fingerprint = 0;
    std::function<std::optional<features::FeatureVector>(
        double lat, double lon, const Date& date)>
        get;
};

// Cell-by-cell model inference in W m-2; missing cells become NaN. Equals
// a plain map of predict over cell centers at any thread count.
EtGrid predict_grid(const gbdt::Ensemble& model,
                    const FeatureProvider& provider, const GridSpec& spec,
                    const Date& date);

// W m-2 <-> mm day-1 (factor 0.0864/2.45); converting to the grid's own
// unit copies it. NaN cells stay NaN.
EtGrid convert_units(const EtGrid& grid, Unit target);

// Cellwise sum of daily grids (mm day-1) from one calendar month. With
// require_complete every day of the month must be present exactly once.
// A NaN on any contributing day makes that cell NaN.
EtGrid monthly_aggregate(const std::vector<EtGrid>& daily,
                         bool require_complete);

// ETGRID v1 container: "ETGRID01" magic, little-endian u32 header length,
// UTF-8 JSON header, then float32 payload bytes (row-major, little-endian).
// Round trips preserve payload bits, including NaN patterns.
void write_grid(const EtGrid& grid, const std::string& path);
EtGrid read_grid(const std::string& path);

// One "lat,lon,value" row per cell at cell centers; NaN as empty value.
void grid_to_csv(const EtGrid& grid, const std::string& path);

// "et_YYYY-MM-DD.etg" for daily grids, "et_YYYY-MM.etg" for monthly.
std::string grid_file_name(const Date& date, bool monthly);

}  // namespace etup::gridio
