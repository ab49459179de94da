#include "etup/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "etup/error.hpp"

namespace etup::features {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::array<const char*, 6> kStatNames = {"last", "min",    "max",
                                               "std",  "roll30", "roll7"};

const std::array<const char*, 7> kBandNames = {"red",  "nir1",  "blue", "green",
                                               "nir2", "swir1", "swir2"};

const std::array<const char*, 4> kAngleNames = {
    "sensor_zenith", "sensor_azimuth", "solar_zenith", "solar_azimuth"};

const std::array<const char*, 5> kViNames = {"ndvi", "evi", "gndvi", "savi",
                                             "arvi"};

// CRO..OSH carry fixed codes; the remaining standard classes are appended
// alphabetically so the mapping never depends on input order.
const std::vector<std::string> kIgbpTable = {
    "CRO", "DBF", "ENF", "GRA", "MF",  "WET", "OSH", "BSV", "CSH",
    "CVM", "DNF", "EBF", "SAV", "SNO", "URB", "WAT", "WSA"};

}  // namespace

bool is_cumulative_variable(const std::string& name) {
    return name == "ssr" || name == "evap" || name == "tp";
}

const std::array<double, kWindowDays>& MeteoWindow::at(
    const std::string& var) const {
    auto it = series.find(var);
    if (it == series.end())
        throw_invalid("meteo window for " + site_id + " lacks variable '" +
                      var + "'");
    return it->second;
}

physics::MeteoDay MeteoWindow::day(int lag) const {
    if (lag < 0 || lag >= kWindowDays)
        throw_invalid("window lag out of range: " + std::to_string(lag));
    physics::MeteoDay d;
    d.t2m = at("t2m")[lag];
    d.d2m = at("d2m")[lag];
    d.u10 = at("u10")[lag];
    d.v10 = at("v10")[lag];
    d.sp = at("sp")[lag];
    d.ssr = at("ssr")[lag];
    d.evap = at("evap")[lag];
    d.tp = at("tp")[lag];
    return d;
}

SeriesStats series_stats(const std::array<double, kWindowDays>& series,
                         StatKind kind) {
    for (double v : series) {
        if (!std::isfinite(v)) throw_invalid("non-finite entry in series");
    }

    SeriesStats s;
    s.last = series.back();
    s.min = *std::min_element(series.begin(), series.end());
    s.max = *std::max_element(series.begin(), series.end());

    double sum = 0.0;
    for (double v : series) sum += v;
    double mean = sum / kWindowDays;
    double sq = 0.0;
    for (double v : series) sq += (v - mean) * (v - mean);
    s.std = std::sqrt(sq / kWindowDays);

    double sum7 = 0.0;
    for (int i = kWindowDays - 7; i < kWindowDays; ++i) sum7 += series[i];

    if (kind == StatKind::cumulative) {
        s.roll30 = sum;
        s.roll7 = sum7;
    } else {
        s.roll30 = mean;
        s.roll7 = sum7 / 7.0;
    }
    return s;
}

VegetationIndices vegetation_indices(const std::array<double, 7>& bands) {
    double nir = bands[kNir1];
    double red = bands[kRed];
    double blue = bands[kBlue];
    double green = bands[kGreen];
    for (double v : {nir, red, blue, green}) {
        if (!std::isfinite(v)) throw_invalid("non-finite reflectance band");
    }

    auto ratio = [](double num, double den) {
        return std::abs(den) < 1e-9 ? kNaN : num / den;
    };

    VegetationIndices vi{};
    vi.ndvi = ratio(nir - red, nir + red);
    vi.evi = ratio(nir - red, nir + 6.0 * red - 7.5 * blue + 1.0);
    vi.gndvi = ratio(nir - green, nir + green);
    vi.savi = ratio(1.5 * (nir - red), nir + red + 0.5);
    vi.arvi = ratio(nir - 2.0 * red + blue, nir + 2.0 * red - blue);
    return vi;
}

int decode_cloud_qa(std::uint16_t state_qa) {
    bool cloudy = (state_qa & 0x3u) != 0;      // bits 0-1: cloud state
    bool shadow = (state_qa & 0x4u) != 0;      // bit 2: cloud shadow
    return (cloudy || shadow) ? 1 : 0;
}

const char* feature_group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::weather: return "weather";
        case FeatureGroup::reflectance: return "reflectance";
        case FeatureGroup::vi: return "vi";
        case FeatureGroup::geometry: return "geometry";
        case FeatureGroup::kgml: return "kgml";
        case FeatureGroup::meta: return "meta";
    }
    return "?";
}

namespace {

FeatureGroup group_from_name(const std::string& s) {
    for (FeatureGroup g :
         {FeatureGroup::weather, FeatureGroup::reflectance, FeatureGroup::vi,
          FeatureGroup::geometry, FeatureGroup::kgml, FeatureGroup::meta}) {
        if (s == feature_group_name(g)) return g;
    }
    throw Error(ErrorCode::bad_format, "unknown feature group '" + s + "'");
}

}  // namespace

FeatureSchema FeatureSchema::current() {
    FeatureSchema schema;
    schema.version_ = "etup-features-v1";
    auto& slots = schema.slots_;
    slots.reserve(75);

    for (const char* var : kMeteoVariables) {
        for (const char* stat : kStatNames)
            slots.push_back({std::string(var) + "_" + stat,
                             FeatureGroup::weather});
    }
    for (const char* b : kBandNames)
        slots.push_back({std::string("refl_") + b, FeatureGroup::reflectance});
    for (const char* a : kAngleNames)
        slots.push_back({a, FeatureGroup::geometry});
    slots.push_back({"cloud_flag", FeatureGroup::reflectance});
    for (const char* v : kViNames) slots.push_back({v, FeatureGroup::vi});
    for (const char* stat : kStatNames)
        slots.push_back({std::string("pm_et0_") + stat, FeatureGroup::kgml});
    slots.push_back({"lat", FeatureGroup::meta});
    slots.push_back({"lon", FeatureGroup::meta});
    slots.push_back({"doy", FeatureGroup::meta});
    slots.push_back({"igbp", FeatureGroup::meta});
    return schema;
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::bad_format,
                    std::string("bad schema json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("version") || !j.contains("slots"))
        throw Error(ErrorCode::bad_format, "schema json lacks version/slots");

    FeatureSchema schema;
    schema.version_ = j.at("version").get<std::string>();
    for (const auto& slot : j.at("slots")) {
        schema.slots_.push_back(
            {slot.at("name").get<std::string>(),
             group_from_name(slot.at("group").get<std::string>())});
    }
    return schema;
}

int FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].name == name) return int(i);
    return -1;
}

std::string FeatureSchema::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version_;
    auto& arr = j["slots"] = nlohmann::ordered_json::array();
    for (const auto& slot : slots_) {
        arr.push_back({{"name", slot.name},
                       {"group", feature_group_name(slot.group)}});
    }
    return j.dump();
}

std::uint64_t FeatureSchema::fingerprint() const {
    // FNV-1a over the canonical text layout.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ull;
    };
    mix(version_);
    for (const auto& slot : slots_) {
        mix(slot.name);
        mix(feature_group_name(slot.group));
    }
    return h;
}

int igbp_code(const std::string& igbp) {
    for (std::size_t i = 0; i < kIgbpTable.size(); ++i)
        if (kIgbpTable[i] == igbp) return int(i);
    throw_invalid("unknown IGBP class '" + igbp + "'");
}

std::optional<std::string> igbp_name(int code) {
    if (code < 0 || std::size_t(code) >= kIgbpTable.size()) return std::nullopt;
    return kIgbpTable[std::size_t(code)];
}

double daily_reference_et0(const physics::MeteoDay& met,
                           const physics::GeoTime& geo) {
    physics::PmInputs pm;
    pm.t = met.t2m;
    pm.g = 0.0;
    pm.es = physics::saturation_vapor_pressure(met.t2m);
    // Dewpoint above air temperature happens in reanalysis; treat such
    // days as saturated rather than rejecting the window.
    pm.ea = std::min(physics::actual_vapor_pressure(met.d2m), pm.es);
    pm.delta = physics::vapor_curve_slope(met.t2m);
    pm.gamma = physics::psychrometric_constant(met.sp);
    pm.u2 = physics::wind_speed_2m(met.u10, met.v10);
    double ra = physics::extraterrestrial_radiation(geo);
    pm.rn = physics::net_radiation(met.ssr, met.t2m, pm.ea, ra);
    return std::max(physics::penman_monteith(pm), 0.0);
}

SeriesStats pm_feature_series(const MeteoWindow& window,
                              const physics::GeoTime& geo) {
    std::array<double, kWindowDays> et0{};
    for (int lag = 0; lag < kWindowDays; ++lag) {
        Date day = add_days(window.date, lag - (kWindowDays - 1));
        physics::GeoTime day_geo{geo.lat, geo.lon, double(day_of_year(day))};
        try {
            et0[lag] = daily_reference_et0(window.day(lag), day_geo);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (window lag " +
                                      std::to_string(lag) + ", site " +
                                      window.site_id + ")");
        }
    }
    return series_stats(et0, StatKind::instantaneous);
}

FeatureVector assemble_features(const MeteoWindow& window,
                                const std::optional<ReflectanceSample>& refl,
                                const physics::GeoTime& geo, int igbp,
                                int doy, const FeatureSchema& schema) {
    if (schema.version() != FeatureSchema::current().version())
        throw Error(ErrorCode::schema_mismatch,
                    "schema version '" + schema.version() +
                        "' does not match this library");

    FeatureVector out;
    out.reserve(schema.size());

    for (const char* var : kMeteoVariables) {
        StatKind kind = is_cumulative_variable(var) ? StatKind::cumulative
                                                    : StatKind::instantaneous;
        SeriesStats s = series_stats(window.at(var), kind);
        out.insert(out.end(), {s.last, s.min, s.max, s.std, s.roll30, s.roll7});
    }

    if (refl) {
        for (double b : refl->bands) out.push_back(b);
        out.insert(out.end(), {refl->sensor_zenith, refl->sensor_azimuth,
                               refl->solar_zenith, refl->solar_azimuth});
        out.push_back(double(decode_cloud_qa(refl->state_qa)));
        VegetationIndices vi = vegetation_indices(refl->bands);
        out.insert(out.end(), {vi.ndvi, vi.evi, vi.gndvi, vi.savi, vi.arvi});
    } else {
        // 7 bands + 4 angles + flag + 5 indices, all unknown.
        out.insert(out.end(), 17, kNaN);
    }

    SeriesStats pm = pm_feature_series(window, geo);
    out.insert(out.end(), {pm.last, pm.min, pm.max, pm.std, pm.roll30,
                           pm.roll7});

    out.insert(out.end(), {geo.lat, geo.lon, double(doy), double(igbp)});

    if (out.size() != schema.size())
        throw Error(ErrorCode::internal, "feature layout drifted from schema");
    return out;
}

}  // namespace etup::features
