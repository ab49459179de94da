#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etup/dataset.hpp"
#include "etup/dates.hpp"
#include "etup/features.hpp"

namespace etup::ingest {

struct SiteMeta {
    std::string site_id;
    double lat = 0.0;
    double lon = 0.0;
    int igbp = 0;
};

struct FluxObservation {
    std::string site_id;
    Date date;
    double le = 0.0;  // W m-2
    double qc = 0.0;  // gap-fill quality fraction, 0..1
};

inline constexpr double kDefaultQcMin = 0.75;

// CSV header: site_id,lat,lon,igbp. Duplicate site ids are an error.
std::vector<SiteMeta> load_sites(const std::string& path);

// CSV header: site_id,date,le_f_mds,le_f_mds_qc. Rows with qc < qc_min are
// dropped (boundary kept); a malformed row aborts with its line number.
std::vector<FluxObservation> load_flux(const std::string& path,
                                       double qc_min = kDefaultQcMin);

// Wide CSV: site_id,date,variable,lag00..lag29 (lag29 = observation day).
// All eight meteorology variables must be present per site-date.
std::vector<features::MeteoWindow> load_meteo_windows(const std::string& path);

struct ReflectanceLoad {
    std::map<std::pair<std::string, Date>, features::ReflectanceSample> samples;
    std::vector<std::string> warnings;  // suspicious band values, rows kept
};

// CSV header: site_id,date,red,nir1,blue,green,nir2,swir1,swir2,
// sensor_zenith,sensor_azimuth,solar_zenith,solar_azimuth,state_qa.
ReflectanceLoad load_reflectance(const std::string& path);

struct JoinStats {
    std::size_t rows = 0;
    std::size_t dropped_no_window = 0;
    std::size_t missing_reflectance = 0;
};

// Inner join of flux and meteorology windows on (site_id, date); left join
// of reflectance; flux rows without a window are counted and dropped.
DatasetTable join_dataset(const std::vector<SiteMeta>& sites,
                          const std::vector<FluxObservation>& flux,
                          const std::vector<features::MeteoWindow>& windows,
                          const ReflectanceLoad& refl,
                          const features::FeatureSchema& schema,
                          JoinStats* stats = nullptr);

struct SynthConfig {
    int n_sites = 4;
    int years = 3;
    int start_year = 2019;
    int day_step = 1;          // sample every n-th day of the year
    double noise_sigma = 5.0;  // W m-2 on the target
    std::uint64_t seed = 0;
};

struct SynthDataset {
    DatasetTable table;
    std::vector<SiteMeta> sites;
    // Human-readable statement of the generating process.
    std::string ground_truth;
};

// Deterministic desk-scale dataset: sinusoidal seasonal meteorology with
// per-site offsets and day noise; the target is the energy equivalent of
// the observation day's clamped reference ET scaled by a per-biome factor,
// plus Gaussian noise; reflectance co-varies with season through NDVI.
SynthDataset synth_dataset(const SynthConfig& cfg,
                           const features::FeatureSchema& schema);

// Writes the four ingestion CSVs for a synthetic dataset into out_dir
// (sites.csv, flux.csv, meteo.csv, reflectance.csv), creating it if needed.
void write_synth_csvs(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace etup::ingest
