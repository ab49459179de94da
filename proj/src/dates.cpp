#include "etup/dates.hpp"

#include <cstdio>

#include "etup/error.hpp"

namespace etup {

namespace chr = std::chrono;

namespace {

chr::year_month_day to_ymd(const Date& d) {
    return chr::year_month_day{chr::year{d.year}, chr::month{d.month},
                               chr::day{d.day}};
}

Date from_ymd(const chr::year_month_day& ymd) {
    return Date{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3 ||
        text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw_invalid("bad date '" + text + "', expected YYYY-MM-DD");
    }
    Date out{y, m, d};
    if (!to_ymd(out).ok()) throw_invalid("invalid calendar date '" + text + "'");
    return out;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

bool is_leap_year(int year) { return chr::year{year}.is_leap(); }

int days_in_month(int year, unsigned month) {
    auto last = chr::year_month_day_last{chr::year{year},
                                         chr::month_day_last{chr::month{month}}};
    return int(unsigned(last.day()));
}

int day_of_year(const Date& d) {
    auto jan1 = chr::year_month_day{chr::year{d.year}, chr::January, chr::day{1}};
    return int((chr::sys_days{to_ymd(d)} - chr::sys_days{jan1}).count()) + 1;
}

Date add_days(const Date& d, int delta) {
    return from_ymd(chr::year_month_day{chr::sys_days{to_ymd(d)} +
                                        chr::days{delta}});
}

long day_difference(const Date& a, const Date& b) {
    return (chr::sys_days{to_ymd(a)} - chr::sys_days{to_ymd(b)}).count();
}

}  // namespace etup
