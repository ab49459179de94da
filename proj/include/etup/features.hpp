#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etup/dates.hpp"
#include "etup/physics.hpp"

namespace etup::features {

inline constexpr int kWindowDays = 30;

// ERA5 variables, in the order their stat blocks appear in the vector.
inline constexpr std::array<const char*, 8> kMeteoVariables = {
    "t2m", "d2m", "u10", "v10", "sp", "ssr", "evap", "tp"};

// Variables whose rolling windows are sums rather than means.
bool is_cumulative_variable(const std::string& name);

// 30-day per-variable series for one site-day; entries ordered oldest to
// newest, the last one being the observation day itself.
struct MeteoWindow {
    std::string site_id;
    Date date;
    std::map<std::string, std::array<double, kWindowDays>> series;

    const std::array<double, kWindowDays>& at(const std::string& var) const;
    physics::MeteoDay day(int lag) const;  // lag 0 = oldest, 29 = newest
};

enum class StatKind { instantaneous, cumulative };

struct SeriesStats {
    double last = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std = 0.0;     // population denominator
    double roll30 = 0.0;  // mean (instantaneous) or sum (cumulative)
    double roll7 = 0.0;
};

SeriesStats series_stats(const std::array<double, kWindowDays>& series,
                         StatKind kind);

// MOD09GA bands in file/vector order.
enum BandIndex : int {
    kRed = 0, kNir1 = 1, kBlue = 2, kGreen = 3, kNir2 = 4, kSwir1 = 5,
    kSwir2 = 6
};

struct ReflectanceSample {
    std::array<double, 7> bands{};
    double sensor_zenith = 0.0;
    double sensor_azimuth = 0.0;
    double solar_zenith = 0.0;
    double solar_azimuth = 0.0;
    std::uint16_t state_qa = 0;
};

struct VegetationIndices {
    double ndvi, evi, gndvi, savi, arvi;
};

// Computes the five indices exactly as published, NIR meaning band NIR1.
// A denominator smaller than 1e-9 in magnitude yields NaN for that index.
VegetationIndices vegetation_indices(const std::array<double, 7>& bands);

// 1 when the cloud-state bits 0-1 are not "clear" (00) or the cloud-shadow
// bit 2 is set; 0 otherwise. Bits 3+ are ignored.
int decode_cloud_qa(std::uint16_t state_qa);

enum class FeatureGroup { weather, reflectance, vi, geometry, kgml, meta };

const char* feature_group_name(FeatureGroup g);

struct FeatureSlot {
    std::string name;
    FeatureGroup group;
};

// Immutable ordered layout of the predictor vector. The version tag is
// serialized with every trained model so stale pairings are rejected.
class FeatureSchema {
public:
    static FeatureSchema current();           // the canonical v1 layout
    static FeatureSchema from_json(const std::string& text);

    const std::string& version() const { return version_; }
    const std::vector<FeatureSlot>& slots() const { return slots_; }
    std::size_t size() const { return slots_.size(); }
    int index_of(const std::string& name) const;  // -1 when absent

    std::string to_json() const;
    // Order-sensitive digest of version + slot names + groups.
    std::uint64_t fingerprint() const;

private:
    std::string version_;
    std::vector<FeatureSlot> slots_;
};

using FeatureVector = std::vector<double>;

// IGBP land-cover classes get small integer codes so tree models can split
// on them directly. The first seven are fixed; the remaining standard
// classes follow alphabetically.
int igbp_code(const std::string& igbp);               // throws on unknown
std::optional<std::string> igbp_name(int code);

// One day's reference ET from raw meteorology, clamped to >= 0. Dewpoints
// above the air temperature are treated as saturation, not rejected.
double daily_reference_et0(const physics::MeteoDay& met,
                           const physics::GeoTime& geo);

// Daily reference-ET statistics over the window: each day's value is
// computed from that day's meteorology and its own day-of-year (counted
// backwards from the observation date), clamped to >= 0, then summarized
// with instantaneous-kind statistics (rolling values are means).
SeriesStats pm_feature_series(const MeteoWindow& window,
                              const physics::GeoTime& geo);

// Flattens one observation into the schema order:
//   [8 weather vars x 6 stats] [7 bands] [4 angles] [cloud flag] [5 VIs]
//   [6 reference-ET stats] [lat, lon, doy, igbp].
// A missing reflectance sample fills bands/angles/flag/VIs with NaN.
FeatureVector assemble_features(const MeteoWindow& window,
                                const std::optional<ReflectanceSample>& refl,
                                const physics::GeoTime& geo, int igbp,
                                int doy, const FeatureSchema& schema);

}  // namespace etup::features
