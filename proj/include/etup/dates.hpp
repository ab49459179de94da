#pragma once

#include <chrono>
#include <compare>
#include <string>

namespace etup {

// Calendar date (proleptic Gregorian). Thin wrapper around the
// std::chrono civil-calendar types with ISO-8601 text conversion.
struct Date {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;
};

// Parses "YYYY-MM-DD"; rejects anything else, including invalid civil dates.
Date parse_date(const std::string& text);

std::string format_date(const Date& d);

bool is_leap_year(int year);
int days_in_month(int year, unsigned month);

// 1-based ordinal day within the year (1..365/366).
int day_of_year(const Date& d);

Date add_days(const Date& d, int delta);

// Signed whole-day difference a - b.
long day_difference(const Date& a, const Date& b);

}  // namespace etup
