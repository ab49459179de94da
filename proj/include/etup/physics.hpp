#pragma once

namespace etup::physics {

// One day of ERA5-Land meteorology at a point.
// Units: temperatures degC, winds m/s, pressure kPa, radiation
// MJ m-2 day-1, evaporation/precipitation mm day-1.
struct MeteoDay {
    double t2m = 0.0;   // air temperature at 2 m
    double d2m = 0.0;   // dewpoint at 2 m
    double u10 = 0.0;   // eastward wind at 10 m
    double v10 = 0.0;   // northward wind at 10 m
    double sp = 0.0;    // surface pressure
    double ssr = 0.0;   // surface net solar radiation
    double evap = 0.0;  // total evaporation
    double tp = 0.0;    // total precipitation
};

// Assembled inputs for the daily reference-ET equation.
struct PmInputs {
    double rn = 0.0;     // net radiation, MJ m-2 day-1
    double g = 0.0;      // soil heat flux, MJ m-2 day-1
    double t = 0.0;      // air temperature, degC
    double u2 = 0.0;     // wind speed at 2 m, m/s
    double es = 0.0;     // saturation vapor pressure, kPa
    double ea = 0.0;     // actual vapor pressure, kPa
    double delta = 0.0;  // vapor-pressure-curve slope, kPa/degC
    double gamma = 0.0;  // psychrometric constant, kPa/degC
};

struct GeoTime {
    double lat = 0.0;  // decimal degrees, -90..90
    double lon = 0.0;  // decimal degrees, -180..180
    double doy = 1.0;  // day of year, 1..366 (fractional values allowed)
};

// Tetens saturation vapor pressure, kPa. Strictly increasing in T.
double saturation_vapor_pressure(double t_celsius);

// Vapor pressure at the dewpoint, kPa.
double actual_vapor_pressure(double tdew_celsius);

// Slope of the saturation curve at T, kPa/degC.
double vapor_curve_slope(double t_celsius);

// gamma = 0.000665 * P, kPa/degC. Requires sp > 0.
double psychrometric_constant(double sp_kpa);

// 10 m wind components -> 2 m scalar speed via the FAO-56 log profile.
double wind_speed_2m(double u10, double v10);

// Top-of-atmosphere solar radiation for a latitude/day, MJ m-2 day-1.
// Valid for |lat| < 66.5 (no polar day/night handling).
double extraterrestrial_radiation(const GeoTime& geo);

// Net all-wave radiation: ERA5 net shortwave minus an FAO-56-style net
// longwave estimate. May be negative. Requires ssr >= 0, ra > 0.
double net_radiation(double ssr, double t_celsius, double ea_kpa, double ra);

// Daily reference ET, mm day-1. The raw equation value is returned;
// clamping to >= 0 is the feature layer's job.
double penman_monteith(const PmInputs& in);

struct HargreavesResult {
    double et_mm_dekad = 0.0;
    // Set when tavg <= -17.8 degC forces the temperature term nonpositive;
    // the value is reported as 0 in that case.
    bool degenerate = false;
};

// Temperature-based dekadal ET. ra is the dekad-summed extraterrestrial
// radiation; days is the dekad length (8..11). The trailing day-count
// factor is applied multiplicatively, exactly as in the source formula.
HargreavesResult hargreaves_samani(double tavg, double tmax, double tmin,
                                   double ra, double kt, int days);

// Latent heat flux (W m-2) <-> water depth (mm day-1) with a fixed
// latent heat of vaporization of 2.45 MJ kg-1.
double le_to_et_depth(double le_wm2);
double et_depth_to_le(double et_mm_day);

// Conversion factor used by the pair above (0.0864 / 2.45).
inline constexpr double kLeToEtFactor = 0.0864 / 2.45;

}  // namespace etup::physics
