#include <doctest.h>

#include <cmath>

#include "etup/error.hpp"
#include "etup/physics.hpp"

using namespace etup;
using namespace etup::physics;
using doctest::Approx;

TEST_SUITE_BEGIN("physics");

TEST_CASE("saturation vapor pressure") {
    CHECK(saturation_vapor_pressure(0.0) == Approx(0.6108).epsilon(1e-12));
    CHECK(saturation_vapor_pressure(20.0) ==
          Approx(2.338281270927446).epsilon(1e-12));
    CHECK(saturation_vapor_pressure(-5.0) ==
          Approx(0.42117649202727186).epsilon(1e-12));
    CHECK_THROWS_AS(saturation_vapor_pressure(std::nan("")), Error);
    CHECK_THROWS_AS(saturation_vapor_pressure(-150.0), Error);

    // strictly increasing
    double prev = saturation_vapor_pressure(-40.0);
    for (double t = -39.5; t <= 50.0; t += 0.5) {
        double cur = saturation_vapor_pressure(t);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("actual vapor pressure is es at the dewpoint") {
    CHECK(actual_vapor_pressure(0.0) == Approx(0.6108).epsilon(1e-12));
    CHECK(actual_vapor_pressure(15.0) ==
          Approx(1.7053462321157722).epsilon(1e-12));
    CHECK(actual_vapor_pressure(17.3) == saturation_vapor_pressure(17.3));
}

TEST_CASE("vapor curve slope") {
    CHECK(vapor_curve_slope(20.0) ==
          Approx(0.14474018811241365).epsilon(1e-12));
    CHECK(vapor_curve_slope(16.9) ==
          Approx(0.12211265844598747).epsilon(1e-12));
    for (double t = -30.0; t <= 45.0; t += 2.5) CHECK(vapor_curve_slope(t) > 0.0);

    // matches the numerical derivative of es
    const double h = 1e-4;
    for (double t = -20.0; t <= 40.0; t += 1.0) {
        double numeric = (saturation_vapor_pressure(t + h) -
                          saturation_vapor_pressure(t - h)) /
                         (2.0 * h);
        CHECK(std::abs(vapor_curve_slope(t) - numeric) < 1e-4);
    }
}

TEST_CASE("psychrometric constant") {
    CHECK(psychrometric_constant(101.3) == Approx(0.0673645).epsilon(1e-12));
    CHECK(psychrometric_constant(81.8) == Approx(0.054397).epsilon(1e-12));
    CHECK_THROWS_AS(psychrometric_constant(0.0), Error);
    CHECK_THROWS_AS(psychrometric_constant(-3.0), Error);
}

TEST_CASE("wind speed height conversion") {
    CHECK(wind_speed_2m(0.0, 0.0) == 0.0);
    CHECK(wind_speed_2m(3.0, 4.0) == Approx(3.7397553758397204).epsilon(1e-12));
    CHECK(wind_speed_2m(-3.0, 4.0) == wind_speed_2m(3.0, 4.0));
    CHECK_THROWS_AS(wind_speed_2m(std::nan(""), 1.0), Error);
}

TEST_CASE("extraterrestrial radiation") {
    // Near-equinox value at the equator; 37.6 is the idealized
    // zero-declination figure.
    double ra_eq = extraterrestrial_radiation({0.0, 0.0, 80.0});
    CHECK(ra_eq == Approx(37.82421310762571).epsilon(1e-12));
    CHECK(std::abs(ra_eq - 37.6) < 0.3);

    CHECK(extraterrestrial_radiation({44.7, 0.0, 196.0}) ==
          Approx(40.6171146062305).epsilon(1e-12));

    // northern summer beats northern winter
    CHECK(extraterrestrial_radiation({45.0, 0.0, 172.0}) >
          extraterrestrial_radiation({45.0, 0.0, 355.0}));

    for (double lat = 0.0; lat <= 60.0; lat += 7.5)
        CHECK(extraterrestrial_radiation({lat, 0.0, 100.0}) > 0.0);

    CHECK_THROWS_AS(extraterrestrial_radiation({70.0, 0.0, 100.0}), Error);
    CHECK_THROWS_AS(extraterrestrial_radiation({30.0, 0.0, 0.5}), Error);

    // hemisphere symmetry at the exact equinox (zero declination)
    const double doy_equinox = 1.39 * 365.0 / (2.0 * 3.14159265358979323846);
    for (double lat : {10.0, 30.0, 45.0, 60.0}) {
        double north = extraterrestrial_radiation({lat, 0.0, doy_equinox});
        double south = extraterrestrial_radiation({-lat, 0.0, doy_equinox});
        CHECK(std::abs(north - south) < 1e-6);
    }
}

TEST_CASE("net radiation") {
    CHECK(net_radiation(18.0, 20.0, 1.409, 38.1) ==
          Approx(14.850165342622077).epsilon(1e-12));

    // no shortwave: net radiation is the (negative) longwave loss
    CHECK(net_radiation(0.0, 10.0, 1.0, 30.0) <= 0.0);

    // more humidity, less longwave loss
    CHECK(net_radiation(18.0, 20.0, 2.0, 38.1) >
          net_radiation(18.0, 20.0, 1.0, 38.1));

    CHECK_THROWS_AS(net_radiation(18.0, 20.0, 1.4, 0.0), Error);
    CHECK_THROWS_AS(net_radiation(-1.0, 20.0, 1.4, 38.0), Error);
}

TEST_CASE("penman-monteith") {
    PmInputs in{13.28, 0.0, 16.9, 2.078, 1.997, 1.409, 0.122, 0.0666};
    CHECK(penman_monteith(in) == Approx(3.877117063268325).epsilon(1e-12));
    CHECK(std::abs(penman_monteith(in) - 3.9) < 0.05);

    // aerodynamic term vanishes
    PmInputs calm{10.0, 0.0, 20.0, 0.0, 2.0, 2.0, 0.1447, 0.0666};
    CHECK(penman_monteith(calm) ==
          Approx(0.408 * 0.1447 * 10.0 / (0.1447 + 0.0666)).epsilon(1e-12));
    CHECK(penman_monteith(calm) == Approx(2.7940179839091344).epsilon(1e-12));

    // both terms vanish
    PmInputs dead{5.0, 5.0, 20.0, 0.0, 2.0, 2.0, 0.1447, 0.0666};
    CHECK(penman_monteith(dead) == 0.0);

    PmInputs bad = in;
    bad.ea = 3.0;  // ea > es
    CHECK_THROWS_AS(penman_monteith(bad), Error);
    bad = in;
    bad.delta = 0.0;
    CHECK_THROWS_AS(penman_monteith(bad), Error);
}

TEST_CASE("penman-monteith monotone in net radiation") {
    for (double t : {0.0, 10.0, 25.0}) {
        for (double u2 : {0.0, 1.5, 4.0}) {
            double es = saturation_vapor_pressure(t);
            PmInputs in{0.0, 0.0, t, u2, es, 0.6 * es,
                        vapor_curve_slope(t), 0.0665};
            double prev = -1e300;
            for (double rn = -5.0; rn <= 25.0; rn += 0.5) {
                in.rn = rn;
                double et = penman_monteith(in);
                CHECK(et > prev);
                prev = et;
            }
        }
    }
}

TEST_CASE("penman-monteith nonnegative when rn >= g and es >= ea") {
    for (double t : {-10.0, 5.0, 30.0}) {
        for (double rn : {0.0, 3.0, 15.0}) {
            for (double deficit : {0.0, 0.5, 1.5}) {
                double es = saturation_vapor_pressure(t);
                PmInputs in{rn, 0.0, t, 2.0, es,
                            std::max(es - deficit, 0.0),
                            vapor_curve_slope(t), 0.0665};
                CHECK(penman_monteith(in) >= 0.0);
            }
        }
    }
}

TEST_CASE("hargreaves-samani") {
    auto r = hargreaves_samani(20.0, 28.0, 12.0, 30.0, 0.162, 10);
    CHECK(r.et_mm_dekad == Approx(404.74546559999993).epsilon(1e-12));
    CHECK_FALSE(r.degenerate);

    CHECK(hargreaves_samani(15.0, 20.0, 20.0, 30.0, 0.162, 10).et_mm_dekad ==
          0.0);

    auto cold = hargreaves_samani(-17.8, -10.0, -25.0, 8.0, 0.162, 10);
    CHECK(cold.et_mm_dekad == 0.0);
    CHECK(cold.degenerate);

    CHECK_THROWS_AS(hargreaves_samani(10.0, 5.0, 9.0, 30.0, 0.162, 10), Error);
    CHECK_THROWS_AS(hargreaves_samani(10.0, 15.0, 5.0, 30.0, 0.162, 7), Error);
    CHECK_THROWS_AS(hargreaves_samani(10.0, 15.0, 5.0, 30.0, 0.0, 10), Error);

    // linear in kt and in ra
    double base =
        hargreaves_samani(18.0, 25.0, 11.0, 28.0, 0.162, 9).et_mm_dekad;
    CHECK(hargreaves_samani(18.0, 25.0, 11.0, 28.0, 0.324, 9).et_mm_dekad ==
          Approx(2.0 * base).epsilon(1e-12));
    CHECK(hargreaves_samani(18.0, 25.0, 11.0, 84.0, 0.162, 9).et_mm_dekad ==
          Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("latent heat to depth conversion") {
    CHECK(le_to_et_depth(0.0) == 0.0);

    // 22.07 W m-2 pairs with 0.775 mm day-1 up to rounding
    double mm = le_to_et_depth(22.07);
    CHECK(mm == Approx(0.778305306122449).epsilon(1e-12));
    CHECK(std::abs(mm - 0.775) / 0.775 < 0.005);

    for (double le : {0.3, 5.0, 22.07, 180.0, -4.0}) {
        double round = et_depth_to_le(le_to_et_depth(le));
        CHECK(round == Approx(le).epsilon(1e-12));
    }
    CHECK_THROWS_AS(le_to_et_depth(std::nan("")), Error);
}

TEST_SUITE_END();
