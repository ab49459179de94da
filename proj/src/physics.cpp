#include "etup/physics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "etup/error.hpp"

namespace etup::physics {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stefan-Boltzmann constant in MJ K-4 m-2 day-1.
constexpr double kSigma = 4.903e-9;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw_invalid(std::string("non-finite ") + name);
}

}  // namespace

double saturation_vapor_pressure(double t_celsius) {
    require_finite(t_celsius, "temperature");
    if (t_celsius <= -100.0)
        throw_invalid("temperature out of range: " + std::to_string(t_celsius));
    return 0.6108 * std::exp(17.27 * t_celsius / (t_celsius + 237.3));
}

double actual_vapor_pressure(double tdew_celsius) {
    return saturation_vapor_pressure(tdew_celsius);
}

double vapor_curve_slope(double t_celsius) {
    double es = saturation_vapor_pressure(t_celsius);
    double denom = t_celsius + 237.3;
    return 4098.0 * es / (denom * denom);
}

double psychrometric_constant(double sp_kpa) {
    require_finite(sp_kpa, "surface pressure");
    if (sp_kpa <= 0.0)
        throw_invalid("surface pressure must be positive, got " +
                      std::to_string(sp_kpa));
    return 0.000665 * sp_kpa;
}

double wind_speed_2m(double u10, double v10) {
    require_finite(u10, "u10");
    require_finite(v10, "v10");
    double u = std::hypot(u10, v10);
    return u * 4.87 / std::log(67.8 * 10.0 - 5.42);
}

double extraterrestrial_radiation(const GeoTime& geo) {
    require_finite(geo.lat, "latitude");
    require_finite(geo.doy, "day of year");
    if (std::abs(geo.lat) >= 66.5)
        throw Error(ErrorCode::invalid_input,
                    "unsupported latitude " + std::to_string(geo.lat) +
                        " (polar day/night not handled)");
    if (geo.doy < 1.0 || geo.doy > 366.0)
        throw_invalid("day of year out of range: " + std::to_string(geo.doy));

    double phi = geo.lat * kPi / 180.0;
    double dr = 1.0 + 0.033 * std::cos(2.0 * kPi / 365.0 * geo.doy);
    double decl = 0.409 * std::sin(2.0 * kPi / 365.0 * geo.doy - 1.39);
    double ws = std::acos(-std::tan(phi) * std::tan(decl));
    return (24.0 * 60.0 / kPi) * 0.0820 * dr *
           (ws * std::sin(phi) * std::sin(decl) +
            std::cos(phi) * std::cos(decl) * std::sin(ws));
}

double net_radiation(double ssr, double t_celsius, double ea_kpa, double ra) {
    require_finite(ssr, "ssr");
    require_finite(ea_kpa, "ea");
    if (ssr < 0.0) throw_invalid("net shortwave must be >= 0");
    if (!(ra > 0.0)) throw_invalid("extraterrestrial radiation must be > 0");
    if (ea_kpa < 0.0) throw_invalid("vapor pressure must be >= 0");

    double tk = t_celsius + 273.16;
    double humidity = 0.34 - 0.14 * std::sqrt(ea_kpa);
    double rel_sunshine = std::min(ssr / (0.75 * ra), 1.0);
    // Deep-overcast days would drive this factor negative, turning the
    // longwave term into a net gain; clamp so Rnl stays a loss.
    double cloudiness = std::clamp(1.35 * rel_sunshine - 0.35, 0.0, 1.0);
    double rnl = kSigma * tk * tk * tk * tk * humidity * cloudiness;
    return ssr - rnl;
}

double penman_monteith(const PmInputs& in) {
    require_finite(in.rn, "rn");
    require_finite(in.g, "g");
    require_finite(in.t, "t");
    if (in.u2 < 0.0) throw_invalid("wind speed must be >= 0");
    if (!(in.es >= in.ea) || in.ea < 0.0)
        throw_invalid("require es >= ea >= 0");
    if (!(in.delta > 0.0)) throw_invalid("vapor curve slope must be > 0");
    if (!(in.gamma > 0.0)) throw_invalid("psychrometric constant must be > 0");

    double numerator = 0.408 * in.delta * (in.rn - in.g) +
                       in.gamma * (900.0 / (in.t + 273.0)) * in.u2 *
                           (in.es - in.ea);
    double denominator = in.delta + in.gamma * (1.0 + 0.34 * in.u2);
    return numerator / denominator;
}

HargreavesResult hargreaves_samani(double tavg, double tmax, double tmin,
                                   double ra, double kt, int days) {
    require_finite(tavg, "tavg");
    if (tmax < tmin) throw_invalid("tmax < tmin");
    if (days < 8 || days > 11)
        throw_invalid("dekad length must be 8..11 days, got " +
                      std::to_string(days));
    if (!(kt > 0.0)) throw_invalid("kt must be > 0");

    if (tavg <= -17.8) return {0.0, true};
    double et = 0.135 * kt * (tavg + 17.8) * std::sqrt(tmax - tmin) * ra *
                0.408 * double(days);
    return {et, false};
}

double le_to_et_depth(double le_wm2) {
    require_finite(le_wm2, "latent heat flux");
    return le_wm2 * kLeToEtFactor;
}

double et_depth_to_le(double et_mm_day) {
    require_finite(et_mm_day, "et depth");
    return et_mm_day / kLeToEtFactor;
}

}  // namespace etup::physics
