#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/gridio.hpp"
#include "etup/ingest.hpp"
#include "etup/rng.hpp"
#include "etup/threads.hpp"

using namespace etup;
using namespace etup::gridio;
using doctest::Approx;

namespace {

namespace fs = std::filesystem;

constexpr float kNaNf = std::numeric_limits<float>::quiet_NaN();

fs::path temp_file(const std::string& stem) {
    static int n = 0;
    return fs::temp_directory_path() /
           (stem + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(n++));
}

bool bits_equal(float a, float b) {
    std::uint32_t ba, bb;
    std::memcpy(&ba, &a, 4);
    std::memcpy(&bb, &b, 4);
    return ba == bb;
}

gbdt::Ensemble tiny_model(const DatasetTable& table) {
    gbdt::TrainConfig cfg;
    cfg.n_estimators = 12;
    cfg.num_leaves = 8;
    cfg.learning_rate = 0.3;
    return gbdt::fit(table, cfg);
}

DatasetTable tiny_table() {
    ingest::SynthConfig cfg;
    cfg.n_sites = 3;
    cfg.years = 1;
    cfg.day_step = 15;
    cfg.seed = 2;
    return ingest::synth_dataset(cfg, features::FeatureSchema::current())
        .table;
}

}  // namespace

TEST_SUITE_BEGIN("gridio");

TEST_CASE("grid spec geometry") {
    GridSpec spec{44.0, 45.0, -94.0, -92.0, 0.5};
    CHECK(spec.n_rows() == 2);
    CHECK(spec.n_cols() == 4);
    CHECK(spec.center_lat(0) == Approx(44.75));  // row 0 is northernmost
    CHECK(spec.center_lat(1) == Approx(44.25));
    CHECK(spec.center_lon(0) == Approx(-93.75));
    CHECK(spec.center_lon(3) == Approx(-92.25));
    CHECK_NOTHROW(spec.validate());

    GridSpec bad = spec;
    bad.lat_max = 43.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = spec;
    bad.cell_deg = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("unit conversion") {
    GridSpec spec{44.0, 44.5, -94.0, -93.5, 0.25};
    EtGrid g = make_grid(spec, Date{2020, 6, 1}, Unit::wm2);
    g.at(0, 0) = 0.0f;
    g.at(0, 1) = 22.07f;
    g.at(1, 0) = kNaNf;
    g.at(1, 1) = 100.0f;

    EtGrid mm = convert_units(g, Unit::mm_day);
    CHECK(mm.unit == Unit::mm_day);
    CHECK(mm.at(0, 0) == 0.0f);
    CHECK(double(mm.at(0, 1)) == Approx(0.7783).epsilon(1e-4));
    CHECK(std::abs(double(mm.at(0, 1)) - 0.775) / 0.775 < 0.005);
    CHECK(std::isnan(mm.at(1, 0)));

    // round trip within one single-precision ulp
    EtGrid back = convert_units(mm, Unit::wm2);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (std::isnan(g.values[i])) {
            CHECK(std::isnan(back.values[i]));
            continue;
        }
        float ulp = std::nextafter(g.values[i],
                                   std::numeric_limits<float>::infinity()) -
                    g.values[i];
        CHECK(std::abs(back.values[i] - g.values[i]) <= ulp);
    }

    // identity conversion copies
    EtGrid same = convert_units(g, Unit::wm2);
    CHECK(bits_equal(same.at(1, 1), g.at(1, 1)));

    EtGrid monthly = make_grid(spec, Date{2020, 6, 1}, Unit::mm_month);
    CHECK_THROWS_AS(convert_units(monthly, Unit::wm2), Error);
}

TEST_CASE("monthly aggregation") {
    GridSpec spec{44.0, 44.5, -94.0, -93.5, 0.25};

    SUBCASE("thirty equal june days sum to sixty") {
        std::vector<EtGrid> days;
        for (int d = 1; d <= 30; ++d) {
            EtGrid g = make_grid(spec, Date{2020, 6, unsigned(d)},
                                 Unit::mm_day);
            for (auto& v : g.values) v = 2.0f;
            days.push_back(std::move(g));
        }
        EtGrid sum = monthly_aggregate(days, true);
        CHECK(sum.unit == Unit::mm_month);
        CHECK(sum.date == Date{2020, 6, 1});
        for (float v : sum.values) CHECK(v == 60.0f);

        // permutation invariance
        std::swap(days[3], days[17]);
        std::swap(days[0], days[29]);
        EtGrid sum2 = monthly_aggregate(days, true);
        for (std::size_t i = 0; i < sum.values.size(); ++i)
            CHECK(bits_equal(sum.values[i], sum2.values[i]));
    }

    SUBCASE("a NaN day poisons only that cell") {
        std::vector<EtGrid> days;
        for (int d = 1; d <= 30; ++d) {
            EtGrid g = make_grid(spec, Date{2020, 6, unsigned(d)},
                                 Unit::mm_day);
            for (auto& v : g.values) v = 1.0f;
            days.push_back(std::move(g));
        }
        days[10].at(1, 1) = kNaNf;
        EtGrid sum = monthly_aggregate(days, true);
        CHECK(std::isnan(sum.at(1, 1)));
        CHECK(sum.at(0, 0) == 30.0f);
    }

    SUBCASE("leap february accepts 29 days, rejects 28") {
        std::vector<EtGrid> days;
        for (int d = 1; d <= 29; ++d) {
            EtGrid g = make_grid(spec, Date{2020, 2, unsigned(d)},
                                 Unit::mm_day);
            for (auto& v : g.values) v = 1.0f;
            days.push_back(std::move(g));
        }
        CHECK_NOTHROW(monthly_aggregate(days, true));
        days.pop_back();
        CHECK_THROWS_AS(monthly_aggregate(days, true), Error);
        CHECK_NOTHROW(monthly_aggregate(days, false));
    }

    SUBCASE("mixed specs and months are rejected") {
        EtGrid a = make_grid(spec, Date{2020, 6, 1}, Unit::mm_day);
        GridSpec other = spec;
        other.lon_max = -93.0;
        EtGrid b = make_grid(other, Date{2020, 6, 2}, Unit::mm_day);
        CHECK_THROWS_AS(monthly_aggregate({a, b}, false), Error);

        EtGrid c = make_grid(spec, Date{2020, 7, 1}, Unit::mm_day);
        CHECK_THROWS_AS(monthly_aggregate({a, c}, false), Error);

        EtGrid d = make_grid(spec, Date{2020, 6, 1}, Unit::mm_day);
        CHECK_THROWS_AS(monthly_aggregate({a, d}, false), Error);  // dup day

        EtGrid e = make_grid(spec, Date{2020, 6, 2}, Unit::wm2);
        CHECK_THROWS_AS(monthly_aggregate({a, e}, false), Error);  // unit
    }
}

TEST_CASE("etgrid container round trip") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        GridSpec spec;
        spec.lat_min = 40.0;
        spec.lat_max = 40.0 + 0.5 * double(1 + rng.below(6));
        spec.lon_min = -95.0;
        spec.lon_max = -95.0 + 0.5 * double(1 + rng.below(6));
        spec.cell_deg = 0.5;
        EtGrid g = make_grid(spec, Date{2020, 1, 1 + unsigned(rng.below(28))},
                             trial % 2 ? Unit::mm_day : Unit::wm2);
        for (auto& v : g.values) {
            double u = rng.uniform();
            if (u < 0.2) {
                v = kNaNf;
            } else if (u < 0.25) {
                // a specific non-default NaN payload must survive
                std::uint32_t bits = 0x7FC00123u;
                std::memcpy(&v, &bits, 4);
            } else {
                v = float(rng.gaussian() * 50.0);
            }
        }

        auto path = temp_file("etgrid");
        write_grid(g, path.string());
        EtGrid r = read_grid(path.string());
        CHECK(r.spec == g.spec);
        CHECK(r.date == g.date);
        CHECK(r.unit == g.unit);
        REQUIRE(r.values.size() == g.values.size());
        for (std::size_t i = 0; i < g.values.size(); ++i)
            CHECK(bits_equal(r.values[i], g.values[i]));
        fs::remove(path);
    }
}

TEST_CASE("etgrid file layout") {
    GridSpec spec{44.0, 44.75, -94.0, -93.5, 0.25};  // 3 x 2
    REQUIRE(spec.n_rows() == 3);
    REQUIRE(spec.n_cols() == 2);
    EtGrid g = make_grid(spec, Date{2021, 3, 14}, Unit::mm_day);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = float(i);

    auto path = temp_file("layout");
    write_grid(g, path.string());

    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() > 12);
    CHECK(bytes.substr(0, 8) == "ETGRID01");
    std::uint32_t header_len = std::uint32_t(std::uint8_t(bytes[8])) |
                               (std::uint32_t(std::uint8_t(bytes[9])) << 8) |
                               (std::uint32_t(std::uint8_t(bytes[10])) << 16) |
                               (std::uint32_t(std::uint8_t(bytes[11])) << 24);
    CHECK(bytes.size() == 8 + 4 + header_len + 24);

    SUBCASE("flipping one payload byte changes exactly one cell") {
        std::string mutated = bytes;
        mutated[mutated.size() - 3] ^= 0x40;
        auto path2 = temp_file("layout_mut");
        {
            std::ofstream out(path2, std::ios::binary);
            out << mutated;
        }
        EtGrid m = read_grid(path2.string());
        int diffs = 0;
        for (std::size_t i = 0; i < g.values.size(); ++i)
            diffs += bits_equal(m.values[i], g.values[i]) ? 0 : 1;
        CHECK(diffs == 1);
        fs::remove(path2);
    }

    SUBCASE("bad magic rejected") {
        std::string mutated = bytes;
        mutated[0] = 'X';
        auto path2 = temp_file("badmagic");
        {
            std::ofstream out(path2, std::ios::binary);
            out << mutated;
        }
        CHECK_THROWS_AS(read_grid(path2.string()), Error);
        fs::remove(path2);
    }

    SUBCASE("truncation rejected") {
        auto path2 = temp_file("trunc");
        {
            std::ofstream out(path2, std::ios::binary);
            out << bytes.substr(0, bytes.size() - 5);
        }
        CHECK_THROWS_AS(read_grid(path2.string()), Error);
        fs::remove(path2);
    }

    fs::remove(path);
}

TEST_CASE("grid csv export") {
    GridSpec spec{44.0, 44.5, -94.0, -93.5, 0.25};  // 2 x 2
    EtGrid g = make_grid(spec, Date{2020, 6, 1}, Unit::mm_day);
    g.at(0, 0) = 1.25f;
    g.at(0, 1) = kNaNf;
    g.at(1, 0) = -3.5f;
    g.at(1, 1) = 0.123456789f;

    auto path = temp_file("grid_csv");
    grid_to_csv(g, path.string());

    auto table = csv::read_file(path.string());
    REQUIRE(table.header == std::vector<std::string>{"lat", "lon", "value"});
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0][0] == "44.375");  // centers, row 0 north
    CHECK(table.rows[0][1] == "-93.875");
    CHECK(table.rows[1][2] == "");  // NaN as empty

    // re-import reproduces values to at least 6 significant digits
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& field = table.rows[i][2];
        float orig = g.values[i];
        if (field.empty()) {
            CHECK(std::isnan(orig));
            continue;
        }
        double parsed = csv::parse_double(field, "x", 1);
        CHECK(parsed == Approx(double(orig)).epsilon(1e-6));
    }
    fs::remove(path);
}

TEST_CASE("grid file naming") {
    CHECK(grid_file_name(Date{2020, 1, 2}, false) == "et_2020-01-02.etg");
    CHECK(grid_file_name(Date{2020, 1, 2}, true) == "et_2020-01.etg");
}

TEST_CASE("grid inference") {
    DatasetTable table = tiny_table();
    gbdt::Ensemble model = tiny_model(table);
    GridSpec spec{43.0, 45.5, -95.0, -92.5, 0.25};  // 10 x 10
    Date date{2019, 6, 5};

    // provider: deterministic function of the cell position
    FeatureProvider provider;
    provider.schema_fingerprint = model.schema.fingerprint();
    provider.get = [&](double lat, double lon,
                       const Date&) -> std::optional<features::FeatureVector> {
        if (lon < -94.8) return std::nullopt;  // westernmost column missing
        SplitMix64 rng(mix_key(std::uint64_t(lat * 1e6),
                               std::uint64_t(-lon * 1e6), 3));
        features::FeatureVector x(model.schema.size());
        for (auto& v : x) v = rng.uniform() * 5.0;
        return x;
    };

    EtGrid grid = predict_grid(model, provider, spec, date);
    CHECK(grid.unit == Unit::wm2);
    CHECK(grid.date == date);

    // cell-by-cell equality with direct predict calls
    for (std::size_t r = 0; r < spec.n_rows(); ++r) {
        for (std::size_t c = 0; c < spec.n_cols(); ++c) {
            auto x = provider.get(spec.center_lat(r), spec.center_lon(c), date);
            if (!x) {
                CHECK(std::isnan(grid.at(r, c)));
            } else {
                CHECK(grid.at(r, c) == float(model.predict(*x)));
            }
        }
    }

    // identical at any thread count
    set_max_threads(1);
    EtGrid g1 = predict_grid(model, provider, spec, date);
    set_max_threads(5);
    EtGrid g5 = predict_grid(model, provider, spec, date);
    set_max_threads(0);
    for (std::size_t i = 0; i < g1.values.size(); ++i)
        CHECK(bits_equal(g1.values[i], g5.values[i]));

    // all-missing provider
    FeatureProvider missing;
    missing.schema_fingerprint = model.schema.fingerprint();
    missing.get = [](double, double, const Date&) {
        return std::optional<features::FeatureVector>{};
    };
    EtGrid empty = predict_grid(model, missing, spec, date);
    for (float v : empty.values) CHECK(std::isnan(v));

    // schema mismatch detected before any cell is evaluated
    int calls = 0;
    FeatureProvider wrong;
    wrong.schema_fingerprint = 0xDEAD;
    wrong.get = [&](double, double,
                    const Date&) -> std::optional<features::FeatureVector> {
        ++calls;
        return std::nullopt;
    };
    CHECK_THROWS_AS(predict_grid(model, wrong, spec, date), Error);
    CHECK(calls == 0);

    // single-cell grid is one predict call
    GridSpec cell{44.0, 44.25, -94.0, -93.75, 0.25};
    EtGrid one = predict_grid(model, provider, cell, date);
    auto x = provider.get(cell.center_lat(0), cell.center_lon(0), date);
    REQUIRE(x.has_value());
    CHECK(one.at(0, 0) == float(model.predict(*x)));
}

TEST_SUITE_END();
