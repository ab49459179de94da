#include "etup/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "etup/csv.hpp"
#include "etup/error.hpp"
#include "etup/physics.hpp"
#include "etup/rng.hpp"

namespace etup::ingest {

namespace {

using features::kMeteoVariables;
using features::kWindowDays;

const Date kEpoch{1970, 1, 1};

}  // namespace

std::vector<SiteMeta> load_sites(const std::string& path) {
    auto t = csv::read_file(path);
    csv::expect_header(t, {"site_id", "lat", "lon", "igbp"}, path);

    std::vector<SiteMeta> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        long line = t.lines[i];
        SiteMeta s;
        s.site_id = r[0];
        if (!seen.insert(s.site_id).second)
            throw_invalid(path + ":" + std::to_string(line) +
                          ": duplicate site id '" + s.site_id + "'");
        s.lat = csv::parse_double(r[1], path, line);
        s.lon = csv::parse_double(r[2], path, line);
        if (s.lat < -90.0 || s.lat > 90.0 || s.lon < -180.0 || s.lon > 180.0)
            throw_invalid(path + ":" + std::to_string(line) +
                          ": coordinates out of range");
        s.igbp = features::igbp_code(r[3]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FluxObservation> load_flux(const std::string& path, double qc_min) {
    auto t = csv::read_file(path);
    csv::expect_header(t, {"site_id", "date", "le_f_mds", "le_f_mds_qc"}, path);

    std::vector<FluxObservation> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        long line = t.lines[i];
        FluxObservation f;
        f.site_id = r[0];
        try {
            f.date = parse_date(r[1]);
        } catch (const Error& e) {
            throw Error(e.code(), path + ":" + std::to_string(line) + ": " +
                                      e.what());
        }
        f.le = csv::parse_double(r[2], path, line);
        f.qc = csv::parse_double(r[3], path, line);
        if (f.qc < 0.0 || f.qc > 1.0)
            throw_invalid(path + ":" + std::to_string(line) +
                          ": qc fraction outside [0,1]");
        if (f.qc < qc_min) continue;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<features::MeteoWindow> load_meteo_windows(const std::string& path) {
    auto t = csv::read_file(path);
    std::vector<std::string> header = {"site_id", "date", "variable"};
    for (int lag = 0; lag < kWindowDays; ++lag) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "lag%02d", lag);
        header.push_back(buf);
    }
    csv::expect_header(t, header, path);

    std::map<std::pair<std::string, Date>, features::MeteoWindow> grouped;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        long line = t.lines[i];
        const std::string& site = r[0];
        Date date;
        try {
            date = parse_date(r[1]);
        } catch (const Error& e) {
            throw Error(e.code(), path + ":" + std::to_string(line) + ": " +
                                      e.what());
        }
        const std::string& var = r[2];
        if (std::find_if(kMeteoVariables.begin(), kMeteoVariables.end(),
                         [&](const char* v) { return var == v; }) ==
            kMeteoVariables.end())
            throw_invalid(path + ":" + std::to_string(line) +
                          ": unknown variable '" + var + "'");

        auto& window = grouped[{site, date}];
        window.site_id = site;
        window.date = date;
        if (window.series.count(var))
            throw_invalid(path + ":" + std::to_string(line) +
                          ": duplicate series for " + site + " " +
                          format_date(date) + " " + var);
        auto& series = window.series[var];
        for (int lag = 0; lag < kWindowDays; ++lag)
            series[std::size_t(lag)] =
                csv::parse_double(r[std::size_t(3 + lag)], path, line);
    }

    std::vector<features::MeteoWindow> out;
    out.reserve(grouped.size());
    for (auto& [key, window] : grouped) {
        if (window.series.size() != kMeteoVariables.size()) {
            std::ostringstream missing;
            for (const char* v : kMeteoVariables)
                if (!window.series.count(v)) missing << ' ' << v;
            throw_invalid(path + ": incomplete window for " + key.first + " " +
                          format_date(key.second) + ", missing:" +
                          missing.str());
        }
        out.push_back(std::move(window));
    }
    return out;
}

ReflectanceLoad load_reflectance(const std::string& path) {
    auto t = csv::read_file(path);
    csv::expect_header(
        t,
        {"site_id", "date", "red", "nir1", "blue", "green", "nir2", "swir1",
         "swir2", "sensor_zenith", "sensor_azimuth", "solar_zenith",
         "solar_azimuth", "state_qa"},
        path);

    ReflectanceLoad out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        long line = t.lines[i];
        const std::string& site = r[0];
        Date date;
        try {
            date = parse_date(r[1]);
        } catch (const Error& e) {
            throw Error(e.code(), path + ":" + std::to_string(line) + ": " +
                                      e.what());
        }
        features::ReflectanceSample s;
        for (int b = 0; b < 7; ++b) {
            double v = csv::parse_double(r[std::size_t(2 + b)], path, line);
            if (v < -0.1 || v > 1.6) {
                out.warnings.push_back(path + ":" + std::to_string(line) +
                                       ": suspicious reflectance " +
                                       csv::format_double(v));
            }
            s.bands[std::size_t(b)] = v;
        }
        s.sensor_zenith = csv::parse_double(r[9], path, line);
        s.sensor_azimuth = csv::parse_double(r[10], path, line);
        s.solar_zenith = csv::parse_double(r[11], path, line);
        s.solar_azimuth = csv::parse_double(r[12], path, line);
        long qa = csv::parse_long(r[13], path, line);
        if (qa < 0 || qa > 0xFFFF)
            throw_invalid(path + ":" + std::to_string(line) +
                          ": state_qa outside 16-bit range");
        s.state_qa = std::uint16_t(qa);
        out.samples[{site, date}] = s;
    }
    return out;
}

DatasetTable join_dataset(const std::vector<SiteMeta>& sites,
                          const std::vector<FluxObservation>& flux,
                          const std::vector<features::MeteoWindow>& windows,
                          const ReflectanceLoad& refl,
                          const features::FeatureSchema& schema,
                          JoinStats* stats) {
    std::map<std::string, const SiteMeta*> site_by_id;
    for (const auto& s : sites) site_by_id[s.site_id] = &s;

    std::map<std::pair<std::string, Date>, const features::MeteoWindow*>
        window_by_key;
    for (const auto& w : windows) window_by_key[{w.site_id, w.date}] = &w;

    JoinStats local;
    DatasetTable table;
    table.schema = schema;
    for (const auto& f : flux) {
        auto site_it = site_by_id.find(f.site_id);
        if (site_it == site_by_id.end())
            throw_invalid("flux references unknown site '" + f.site_id + "'");
        auto win_it = window_by_key.find({f.site_id, f.date});
        if (win_it == window_by_key.end()) {
            ++local.dropped_no_window;
            continue;
        }

        const SiteMeta& site = *site_it->second;
        int doy = day_of_year(f.date);
        physics::GeoTime geo{site.lat, site.lon, double(doy)};

        std::optional<features::ReflectanceSample> sample;
        auto refl_it = refl.samples.find({f.site_id, f.date});
        if (refl_it != refl.samples.end())
            sample = refl_it->second;
        else
            ++local.missing_reflectance;

        DataRow row;
        row.x = features::assemble_features(*win_it->second, sample, geo,
                                            site.igbp, doy, schema);
        row.target_le = f.le;
        row.group = group_key(f.site_id, f.date);
        row.month = int(f.date.month);
        row.igbp = site.igbp;
        table.rows.push_back(std::move(row));
    }
    local.rows = table.rows.size();
    if (stats) *stats = local;
    return table;
}

// ---------------------------------------------------------------------------
// Synthetic data generation.

namespace {

// Biome scaling between reference and actual ET in the generated target.
double biome_factor(int igbp) {
    auto name = features::igbp_name(igbp);
    if (!name) return 0.8;
    if (*name == "CRO") return 0.90;
    if (*name == "DBF") return 0.85;
    if (*name == "ENF") return 0.65;
    if (*name == "GRA") return 0.75;
    if (*name == "WET") return 0.95;
    return 0.8;
}

const char* kSynthIgbpCycle[5] = {"CRO", "GRA", "DBF", "ENF", "WET"};

// Noise stream ids, one per generated quantity.
enum NoiseId : std::uint64_t {
    kNzT2m = 1,
    kNzDewSpread,
    kNzU10,
    kNzV10,
    kNzSp,
    kNzCloud,
    kNzEvap,
    kNzTpGate,
    kNzTpAmount,
    kNzReflRed,
    kNzReflMissing,
    kNzReflQa,
    kNzAngles,
    kNzTarget,
    kNzQc,
    kNzSiteLat,
    kNzSiteLon,
    kNzSiteTemp,
};

double noise_uniform(const SynthConfig& cfg, std::uint64_t site,
                     std::uint64_t day, NoiseId what) {
    SplitMix64 rng(mix_key(cfg.seed, site, day, what));
    return rng.uniform();
}

double noise_gauss(const SynthConfig& cfg, std::uint64_t site,
                   std::uint64_t day, NoiseId what) {
    SplitMix64 rng(mix_key(cfg.seed, site, day, what));
    return rng.gaussian();
}

struct SynthSite {
    SiteMeta meta;
    double temp_offset = 0.0;
};

SynthSite make_site(const SynthConfig& cfg, int index) {
    SynthSite s;
    s.meta.site_id = "SY-" + std::string(index < 9 ? "0" : "") +
                     std::to_string(index + 1);
    s.meta.lat =
        38.0 + 8.0 * noise_uniform(cfg, std::uint64_t(index), 0, kNzSiteLat);
    s.meta.lon =
        -99.0 + 12.0 * noise_uniform(cfg, std::uint64_t(index), 0, kNzSiteLon);
    s.meta.igbp = features::igbp_code(kSynthIgbpCycle[index % 5]);
    s.temp_offset =
        -2.0 + 4.0 * noise_uniform(cfg, std::uint64_t(index), 0, kNzSiteTemp);
    return s;
}

std::uint64_t site_hash(const std::string& site_id) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : site_id) h = (h ^ std::uint64_t(c)) * 0x100000001b3ull;
    return h;
}

// Deterministic meteorology for one site and absolute day; overlapping
// windows therefore agree on their shared days.
physics::MeteoDay synth_meteo(const SynthConfig& cfg, const SynthSite& site,
                              const Date& date) {
    std::uint64_t sid = site_hash(site.meta.site_id);
    std::uint64_t day = std::uint64_t(day_difference(date, kEpoch));
    double season =
        std::sin(2.0 * 3.14159265358979323846 * (day_of_year(date) - 80) /
                 365.25);

    physics::MeteoDay m;
    m.t2m = 9.0 + site.temp_offset + 14.0 * season +
            1.5 * noise_gauss(cfg, sid, day, kNzT2m);
    double spread =
        2.5 + 1.2 * std::abs(noise_gauss(cfg, sid, day, kNzDewSpread));
    m.d2m = m.t2m - spread;
    m.u10 = 2.2 + 1.1 * noise_gauss(cfg, sid, day, kNzU10);
    m.v10 = 1.2 + 1.1 * noise_gauss(cfg, sid, day, kNzV10);
    m.sp = 97.0 + 2.0 * (noise_uniform(cfg, sid, day, kNzSp) - 0.5);
    double cloud = noise_uniform(cfg, sid, day, kNzCloud);
    m.ssr = std::max(0.0, (10.0 + 9.0 * season) * (1.0 - 0.55 * cloud));
    m.evap = std::max(
        0.0, 0.2 + 2.2 * std::max(season, 0.0) +
                 0.3 * noise_gauss(cfg, sid, day, kNzEvap));
    double gate = noise_uniform(cfg, sid, day, kNzTpGate);
    m.tp = gate < 0.25 ? 4.0 * std::abs(noise_gauss(cfg, sid, day,
                                                    kNzTpAmount)) *
                             (0.6 + 0.4 * std::max(season, 0.0))
                       : 0.0;
    return m;
}

features::MeteoWindow synth_window(const SynthConfig& cfg,
                                   const SynthSite& site, const Date& date) {
    features::MeteoWindow w;
    w.site_id = site.meta.site_id;
    w.date = date;
    for (const char* var : kMeteoVariables) w.series[var] = {};
    for (int lag = 0; lag < kWindowDays; ++lag) {
        Date day = add_days(date, lag - (kWindowDays - 1));
        physics::MeteoDay m = synth_meteo(cfg, site, day);
        w.series["t2m"][std::size_t(lag)] = m.t2m;
        w.series["d2m"][std::size_t(lag)] = m.d2m;
        w.series["u10"][std::size_t(lag)] = m.u10;
        w.series["v10"][std::size_t(lag)] = m.v10;
        w.series["sp"][std::size_t(lag)] = m.sp;
        w.series["ssr"][std::size_t(lag)] = m.ssr;
        w.series["evap"][std::size_t(lag)] = m.evap;
        w.series["tp"][std::size_t(lag)] = m.tp;
    }
    return w;
}

std::optional<features::ReflectanceSample> synth_reflectance(
    const SynthConfig& cfg, const Date& date, std::uint64_t sid) {
    std::uint64_t day = std::uint64_t(day_difference(date, kEpoch));
    if (noise_uniform(cfg, sid, day, kNzReflMissing) < 0.10) return std::nullopt;

    double season =
        std::sin(2.0 * 3.14159265358979323846 * (day_of_year(date) - 80) /
                 365.25);
    double ndvi = 0.22 + 0.45 * std::max(season, 0.0) +
                  0.03 * noise_gauss(cfg, sid, day, kNzReflRed);
    ndvi = std::clamp(ndvi, 0.02, 0.85);

    features::ReflectanceSample s;
    double red = 0.08;
    double nir = red * (1.0 + ndvi) / (1.0 - ndvi);
    s.bands[features::kRed] = red;
    s.bands[features::kNir1] = nir;
    s.bands[features::kBlue] = 0.05;
    s.bands[features::kGreen] = 0.09 + 0.02 * std::max(season, 0.0);
    s.bands[features::kNir2] = nir * 0.95;
    s.bands[features::kSwir1] = 0.21 - 0.05 * std::max(season, 0.0);
    s.bands[features::kSwir2] = 0.12;

    double a = noise_uniform(cfg, sid, day, kNzAngles);
    s.sensor_zenith = 15.0 + 40.0 * a;
    s.sensor_azimuth = -180.0 + 360.0 * noise_uniform(cfg, sid, day + 1, kNzAngles);
    s.solar_zenith = 20.0 + 45.0 * (1.0 - std::max(season, 0.0)) * a;
    s.solar_azimuth = -180.0 + 360.0 * noise_uniform(cfg, sid, day + 2, kNzAngles);
    s.state_qa =
        noise_uniform(cfg, sid, day, kNzReflQa) < 0.2 ? std::uint16_t(1)
                                                      : std::uint16_t(0);
    return s;
}

struct RawSynth {
    std::vector<SynthSite> sites;
    std::vector<FluxObservation> flux;  // already qc-annotated, unfiltered
    std::vector<features::MeteoWindow> windows;
    ReflectanceLoad refl;
};

RawSynth generate_raw(const SynthConfig& cfg) {
    if (cfg.n_sites < 2 || cfg.years < 1 || cfg.day_step < 1)
        throw_config("synthetic dataset needs n_sites >= 2, years >= 1, "
                     "day_step >= 1");
    if (cfg.noise_sigma < 0.0) throw_config("noise_sigma must be >= 0");

    RawSynth raw;
    for (int i = 0; i < cfg.n_sites; ++i) raw.sites.push_back(make_site(cfg, i));

    for (const auto& site : raw.sites) {
        std::uint64_t sid = site_hash(site.meta.site_id);
        for (int y = 0; y < cfg.years; ++y) {
            int year = cfg.start_year + y;
            int n_days = is_leap_year(year) ? 366 : 365;
            for (int doy = 1; doy <= n_days; doy += cfg.day_step) {
                Date date = add_days(Date{year, 1, 1}, doy - 1);
                std::uint64_t day = std::uint64_t(day_difference(date, kEpoch));

                raw.windows.push_back(synth_window(cfg, site, date));

                auto sample = synth_reflectance(cfg, date, sid);
                if (sample) raw.refl.samples[{site.meta.site_id, date}] = *sample;

                physics::MeteoDay today = synth_meteo(cfg, site, date);
                physics::GeoTime geo{site.meta.lat, site.meta.lon,
                                     double(doy)};
                double et0 = features::daily_reference_et0(today, geo);
                double le_clean =
                    physics::et_depth_to_le(et0) * biome_factor(site.meta.igbp);

                FluxObservation f;
                f.site_id = site.meta.site_id;
                f.date = date;
                f.le = le_clean +
                       cfg.noise_sigma * noise_gauss(cfg, sid, day, kNzTarget);
                double qd = noise_uniform(cfg, sid, day, kNzQc);
                f.qc = qd < 0.05 ? 0.5 : (qd < 0.15 ? 0.8 : 1.0);
                raw.flux.push_back(std::move(f));
            }
        }
    }
    return raw;
}

}  // namespace

SynthDataset synth_dataset(const SynthConfig& cfg,
                           const features::FeatureSchema& schema) {
    RawSynth raw = generate_raw(cfg);

    std::vector<FluxObservation> kept;
    for (const auto& f : raw.flux)
        if (f.qc >= kDefaultQcMin) kept.push_back(f);

    std::vector<SiteMeta> sites;
    for (const auto& s : raw.sites) sites.push_back(s.meta);

    SynthDataset out;
    out.table = join_dataset(sites, kept, raw.windows, raw.refl, schema);
    out.sites = sites;

    std::ostringstream gt;
    gt << "target = le(clamped daily reference ET of the observation day) "
          "* biome_factor(igbp) + N(0, "
       << cfg.noise_sigma
       << " W m-2); biome factors CRO 0.90, DBF 0.85, ENF 0.65, GRA 0.75, "
          "WET 0.95; meteorology = seasonal sinusoid + site offset + day "
          "noise; seed "
       << cfg.seed;
    out.ground_truth = gt.str();
    return out;
}

void write_synth_csvs(const SynthConfig& cfg, const std::string& out_dir) {
    RawSynth raw = generate_raw(cfg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw_io("cannot create directory '" + out_dir + "'");
    auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    {
        csv::Writer w(path("sites.csv"));
        w.row({"site_id", "lat", "lon", "igbp"});
        for (const auto& s : raw.sites) {
            w.row({s.meta.site_id, csv::format_double(s.meta.lat),
                   csv::format_double(s.meta.lon),
                   features::igbp_name(s.meta.igbp).value()});
        }
        w.close();
    }
    {
        csv::Writer w(path("flux.csv"));
        w.row({"site_id", "date", "le_f_mds", "le_f_mds_qc"});
        for (const auto& f : raw.flux) {
            w.row({f.site_id, format_date(f.date), csv::format_double(f.le),
                   csv::format_double(f.qc)});
        }
        w.close();
    }
    {
        csv::Writer w(path("meteo.csv"));
        std::vector<std::string> header = {"site_id", "date", "variable"};
        for (int lag = 0; lag < kWindowDays; ++lag) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "lag%02d", lag);
            header.push_back(buf);
        }
        w.row(header);
        for (const auto& win : raw.windows) {
            for (const char* var : kMeteoVariables) {
                std::vector<std::string> row = {win.site_id,
                                                format_date(win.date), var};
                for (double v : win.at(var)) row.push_back(csv::format_double(v));
                w.row(row);
            }
        }
        w.close();
    }
    {
        csv::Writer w(path("reflectance.csv"));
        w.row({"site_id", "date", "red", "nir1", "blue", "green", "nir2",
               "swir1", "swir2", "sensor_zenith", "sensor_azimuth",
               "solar_zenith", "solar_azimuth", "state_qa"});
        for (const auto& [key, s] : raw.refl.samples) {
            std::vector<std::string> row = {key.first, format_date(key.second)};
            for (double b : s.bands) row.push_back(csv::format_double(b));
            row.push_back(csv::format_double(s.sensor_zenith));
            row.push_back(csv::format_double(s.sensor_azimuth));
            row.push_back(csv::format_double(s.solar_zenith));
            row.push_back(csv::format_double(s.solar_azimuth));
            row.push_back(std::to_string(s.state_qa));
            w.row(row);
        }
        w.close();
    }
}

}  // namespace etup::ingest
