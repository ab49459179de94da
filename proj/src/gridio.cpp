#include "etup/gridio.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include <omp.h>
#include <nlohmann/json.hpp>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/physics.hpp"
#include "etup/threads.hpp"

namespace etup::gridio {

namespace {

constexpr float kNaNf = std::numeric_limits<float>::quiet_NaN();
constexpr char kMagic[8] = {'E', 'T', 'G', 'R', 'I', 'D', '0', '1'};

}  // namespace

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::wm2: return "W_m2";
        case Unit::mm_day: return "mm_day";
        case Unit::mm_month: return "mm_month";
    }
    return "?";
}

Unit unit_from_name(const std::string& s) {
    if (s == "W_m2") return Unit::wm2;
    if (s == "mm_day") return Unit::mm_day;
    if (s == "mm_month") return Unit::mm_month;
    throw_invalid("unknown unit '" + s + "'");
}

std::size_t GridSpec::n_rows() const {
    return std::size_t(std::llround((lat_max - lat_min) / cell_deg));
}

std::size_t GridSpec::n_cols() const {
    return std::size_t(std::llround((lon_max - lon_min) / cell_deg));
}

double GridSpec::center_lat(std::size_t row) const {
    return lat_max - (double(row) + 0.5) * cell_deg;
}

double GridSpec::center_lon(std::size_t col) const {
    return lon_min + (double(col) + 0.5) * cell_deg;
}

void GridSpec::validate() const {
    if (!(cell_deg > 0.0) || !(lat_max > lat_min) || !(lon_max > lon_min))
        throw_invalid("bad grid spec: require lat_max > lat_min, "
                      "lon_max > lon_min, cell_deg > 0");
    if (n_rows() < 1 || n_cols() < 1)
        throw_invalid("grid spec yields an empty grid");
}

float& EtGrid::at(std::size_t row, std::size_t col) {
    return values[row * spec.n_cols() + col];
}

float EtGrid::at(std::size_t row, std::size_t col) const {
    return values[row * spec.n_cols() + col];
}

EtGrid make_grid(const GridSpec& spec, const Date& date, Unit unit) {
    spec.validate();
    EtGrid g;
    g.spec = spec;
    g.date = date;
    g.unit = unit;
    g.values.assign(spec.n_rows() * spec.n_cols(), kNaNf);
    return g;
}

EtGrid predict_grid(const gbdt::Ensemble& model,
                    const FeatureProvider& provider, const GridSpec& spec,
                    const Date& date) {
    if (provider.schema_fingerprint != model.schema.fingerprint())
        throw Error(ErrorCode::schema_mismatch,
                    "feature provider schema does not match the model");

    EtGrid grid = make_grid(spec, date, Unit::wm2);
    const std::size_t rows = spec.n_rows(), cols = spec.n_cols();
    const int nthreads = max_threads();
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::size_t r = 0; r < rows; ++r) {
        double lat = spec.center_lat(r);
        for (std::size_t c = 0; c < cols; ++c) {
            auto x = provider.get(lat, spec.center_lon(c), date);
            if (x) grid.at(r, c) = float(model.predict(*x));
        }
    }
    return grid;
}

EtGrid convert_units(const EtGrid& grid, Unit target) {
    if (grid.unit == target) return grid;

    double factor = 0.0;
    if (grid.unit == Unit::wm2 && target == Unit::mm_day)
        factor = physics::kLeToEtFactor;
    else if (grid.unit == Unit::mm_day && target == Unit::wm2)
        factor = 1.0 / physics::kLeToEtFactor;
    else
        throw_invalid(std::string("unsupported unit conversion ") +
                      unit_name(grid.unit) + " -> " + unit_name(target));

    EtGrid out = grid;
    out.unit = target;
    for (auto& v : out.values)
        if (!std::isnan(v)) v = float(double(v) * factor);
    return out;
}

EtGrid monthly_aggregate(const std::vector<EtGrid>& daily,
                         bool require_complete) {
    if (daily.empty()) throw Error(ErrorCode::empty_data, "no daily grids");

    const GridSpec& spec = daily.front().spec;
    const int year = daily.front().date.year;
    const unsigned month = daily.front().date.month;
    std::set<unsigned> days_seen;
    for (const auto& g : daily) {
        if (!(g.spec == spec)) throw_invalid("mixed grid specs");
        if (g.date.year != year || g.date.month != month)
            throw_invalid("grids span more than one calendar month");
        if (g.unit != Unit::mm_day)
            throw_invalid("monthly aggregation expects mm_day grids");
        if (!days_seen.insert(g.date.day).second)
            throw_invalid("duplicate day " + format_date(g.date));
    }
    if (require_complete &&
        int(days_seen.size()) != days_in_month(year, month))
        throw_invalid("incomplete month: have " +
                      std::to_string(days_seen.size()) + " of " +
                      std::to_string(days_in_month(year, month)) + " days");

    EtGrid out = make_grid(spec, Date{year, month, 1}, Unit::mm_month);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double sum = 0.0;
        bool any_nan = false;
        for (const auto& g : daily) {
            if (std::isnan(g.values[i])) {
                any_nan = true;
                break;
            }
            sum += double(g.values[i]);
        }
        out.values[i] = any_nan ? kNaNf : float(sum);
    }
    return out;
}

void write_grid(const EtGrid& grid, const std::string& path) {
    nlohmann::ordered_json header;
    header["spec"] = {{"lat_min", grid.spec.lat_min},
                      {"lat_max", grid.spec.lat_max},
                      {"lon_min", grid.spec.lon_min},
                      {"lon_max", grid.spec.lon_max},
                      {"cell_deg", grid.spec.cell_deg}};
    header["date"] = format_date(grid.date);
    header["unit"] = unit_name(grid.unit);
    header["n_rows"] = grid.spec.n_rows();
    header["n_cols"] = grid.spec.n_cols();
    std::string header_text = header.dump();

    if (grid.values.size() != grid.spec.n_rows() * grid.spec.n_cols())
        throw_invalid("grid payload size does not match its spec");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write '" + path + "'");
    out.write(kMagic, sizeof kMagic);
    std::uint32_t len = std::uint32_t(header_text.size());
    unsigned char len_le[4] = {
        (unsigned char)(len & 0xFF), (unsigned char)((len >> 8) & 0xFF),
        (unsigned char)((len >> 16) & 0xFF), (unsigned char)((len >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(len_le), 4);
    out.write(header_text.data(), std::streamsize(header_text.size()));

    // Float payload, little-endian. Bit patterns pass through untouched.
    for (float v : grid.values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        unsigned char b[4] = {
            (unsigned char)(bits & 0xFF), (unsigned char)((bits >> 8) & 0xFF),
            (unsigned char)((bits >> 16) & 0xFF),
            (unsigned char)((bits >> 24) & 0xFF)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!out) throw_io("write failed on '" + path + "'");
}

EtGrid read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open '" + path + "'");

    auto fail = [&](const std::string& msg) -> void {
        throw Error(ErrorCode::bad_format, path + ": " + msg);
    };

    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        fail("bad magic");
    unsigned char len_le[4];
    if (!in.read(reinterpret_cast<char*>(len_le), 4)) fail("truncated header");
    std::uint32_t len = std::uint32_t(len_le[0]) |
                        (std::uint32_t(len_le[1]) << 8) |
                        (std::uint32_t(len_le[2]) << 16) |
                        (std::uint32_t(len_le[3]) << 24);
    std::string header_text(len, '\0');
    if (!in.read(header_text.data(), len)) fail("truncated header");

    EtGrid grid;
    std::size_t n_rows = 0, n_cols = 0;
    try {
        auto header = nlohmann::json::parse(header_text);
        const auto& spec = header.at("spec");
        grid.spec.lat_min = spec.at("lat_min").get<double>();
        grid.spec.lat_max = spec.at("lat_max").get<double>();
        grid.spec.lon_min = spec.at("lon_min").get<double>();
        grid.spec.lon_max = spec.at("lon_max").get<double>();
        grid.spec.cell_deg = spec.at("cell_deg").get<double>();
        grid.date = parse_date(header.at("date").get<std::string>());
        grid.unit = unit_from_name(header.at("unit").get<std::string>());
        n_rows = header.at("n_rows").get<std::size_t>();
        n_cols = header.at("n_cols").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("bad header json: ") + e.what());
    }
    if (n_rows != grid.spec.n_rows() || n_cols != grid.spec.n_cols())
        fail("header dimensions disagree with the grid spec");

    grid.values.resize(n_rows * n_cols);
    for (auto& v : grid.values) {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4)) fail("truncated payload");
        std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                             (std::uint32_t(b[2]) << 16) |
                             (std::uint32_t(b[3]) << 24);
        std::memcpy(&v, &bits, 4);
    }
    char extra;
    if (in.read(&extra, 1)) fail("trailing bytes after payload");
    return grid;
}

void grid_to_csv(const EtGrid& grid, const std::string& path) {
    csv::Writer w(path);
    w.row({"lat", "lon", "value"});
    for (std::size_t r = 0; r < grid.spec.n_rows(); ++r) {
        for (std::size_t c = 0; c < grid.spec.n_cols(); ++c) {
            w.row({csv::format_double(grid.spec.center_lat(r)),
                   csv::format_double(grid.spec.center_lon(c)),
                   csv::format_float(grid.at(r, c))});
        }
    }
    w.close();
}

std::string grid_file_name(const Date& date, bool monthly) {
    char buf[32];
    if (monthly)
        std::snprintf(buf, sizeof buf, "et_%04d-%02u.etg", date.year,
                      date.month);
    else
        std::snprintf(buf, sizeof buf, "et_%04d-%02u-%02u.etg", date.year,
                      date.month, date.day);
    return buf;
}

}  // namespace etup::gridio
