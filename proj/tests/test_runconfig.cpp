#include <doctest.h>

#include <algorithm>

#include "etup/error.hpp"
#include "etup/runconfig.hpp"

using namespace etup;
using namespace etup::run;
using doctest::Approx;

TEST_SUITE_BEGIN("runconfig");

namespace {

const char* kFullConfig = R"({
  "seed": 11,
  "data": {"sites": "s.csv", "flux": "f.csv", "meteo": "m.csv",
           "reflectance": "r.csv", "qc_min": 0.8},
  "synth": {"n_sites": 5, "years": 4, "start_year": 2018, "day_step": 2,
            "noise_sigma": 4.5},
  "train": {"mode": "boosted", "growth": "leafwise", "n_estimators": 300,
            "learning_rate": 0.05, "num_leaves": 80, "colsample": 0.7},
  "eval": {"k": 5},
  "grid": {"lat_min": 43, "lat_max": 45, "lon_min": -95, "lon_max": -93,
           "cell_deg": 0.5, "dates": ["2020-01-01", "2020-01-02"]},
  "search": {"learning_rate": [0.05, 0.1], "num_leaves": [31, 80]}
})";

}  // namespace

TEST_CASE("full config parses") {
    RunConfig cfg = parse_run_config(kFullConfig, "/base");
    CHECK(cfg.seed == 11);
    CHECK(cfg.data.sites == "/base/s.csv");
    CHECK(cfg.data.qc_min == 0.8);
    CHECK(cfg.synth.n_sites == 5);
    CHECK(cfg.synth.seed == 11);  // inherits the top-level seed
    CHECK(cfg.train.seed == 11);
    CHECK(cfg.train.n_estimators == 300);
    CHECK(cfg.train.learning_rate == 0.05);
    CHECK(cfg.train.num_leaves == 80);
    CHECK(cfg.train.colsample == 0.7);
    CHECK(cfg.eval_k == 5);
    CHECK(cfg.grid.spec.cell_deg == 0.5);
    REQUIRE(cfg.grid.dates.size() == 2);
    CHECK(cfg.grid.dates[0] == Date{2020, 1, 1});
    REQUIRE(cfg.search.size() == 2);
    CHECK(cfg.search[0].param == "learning_rate");
    CHECK(cfg.search[0].values ==
          std::vector<std::string>{"0.05", "0.1"});
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(parse_run_config("{\"sede\": 1}", ""), Error);
    CHECK_THROWS_AS(
        parse_run_config("{\"train\": {\"learning_rte\": 0.1}}", ""), Error);
    CHECK_THROWS_AS(parse_run_config("{\"grid\": {\"cell\": 1}}", ""), Error);
    CHECK_THROWS_AS(
        parse_run_config("{\"search\": {\"not_a_param\": [1]}}", ""), Error);
    CHECK_THROWS_AS(parse_run_config("not json", ""), Error);
    try {
        parse_run_config("{\"sede\": 1}", "");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
    }
}

TEST_CASE("overrides rewrite dotted keys") {
    RunConfig cfg = parse_run_config(
        kFullConfig, "",
        {"train.learning_rate=0.2", "eval.k=7", "seed=99",
         "data.flux=other.csv", "grid.dates=[\"2021-03-01\"]"});
    CHECK(cfg.train.learning_rate == 0.2);
    CHECK(cfg.eval_k == 7);
    CHECK(cfg.seed == 99);
    CHECK(cfg.train.seed == 99);
    CHECK(cfg.data.flux == "other.csv");
    REQUIRE(cfg.grid.dates.size() == 1);
    CHECK(cfg.grid.dates[0] == Date{2021, 3, 1});

    // overrides introducing unknown keys still fail
    CHECK_THROWS_AS(parse_run_config(kFullConfig, "", {"train.xyz=1"}),
                    Error);
    CHECK_THROWS_AS(parse_run_config(kFullConfig, "", {"no-equals"}), Error);
}

TEST_CASE("date ranges expand inclusively") {
    RunConfig cfg = parse_run_config(
        R"({"grid": {"dates": {"start": "2020-02-27", "end": "2020-03-02"}}})",
        "");
    REQUIRE(cfg.grid.dates.size() == 5);  // leap year
    CHECK(cfg.grid.dates[2] == Date{2020, 2, 29});
    CHECK(cfg.grid.dates[4] == Date{2020, 3, 2});

    CHECK_THROWS_AS(
        parse_run_config(
            R"({"grid": {"dates": {"start": "2020-03-02", "end": "2020-03-01"}}})",
            ""),
        Error);
}

TEST_CASE("explicit train seed wins over the top-level seed") {
    RunConfig cfg = parse_run_config(
        R"({"seed": 5, "train": {"seed": 123}})", "");
    CHECK(cfg.seed == 5);
    CHECK(cfg.train.seed == 123);
}

TEST_CASE("absolute paths are kept") {
    RunConfig cfg = parse_run_config(
        R"({"data": {"sites": "/abs/sites.csv"}})", "/base");
    CHECK(cfg.data.sites == "/abs/sites.csv");
}

TEST_CASE("config key registry covers the document") {
    const auto& keys = config_keys();
    auto has = [&](const char* k) {
        return std::find(keys.begin(), keys.end(), k) != keys.end();
    };
    CHECK(has("seed"));
    CHECK(has("data.sites"));
    CHECK(has("train.learning_rate"));
    CHECK(has("eval.k"));
    CHECK(has("grid.dates"));
    CHECK(has("search.num_leaves"));
}

TEST_SUITE_END();
