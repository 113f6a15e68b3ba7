#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agbench {

using Date = std::chrono::sys_days;

inline Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{ymd};
}

inline std::chrono::year_month_day civil(Date d) { return std::chrono::year_month_day{d}; }
inline int year_of(Date d) { return static_cast<int>(civil(d).year()); }
inline unsigned month_of(Date d) { return static_cast<unsigned>(civil(d).month()); }
inline unsigned day_of(Date d) { return static_cast<unsigned>(civil(d).day()); }

inline Date add_days(Date d, long days) { return d + std::chrono::days{days}; }
inline long days_between(Date from, Date to) { return (to - from).count(); }

/// Strict ISO-8601 `YYYY-MM-DD`.
inline Date parse_date(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("invalid ISO date '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [&](std::string_view part, auto& out) {
        for (char c : part)
            if (c < '0' || c > '9') throw fail();
        std::from_chars(part.data(), part.data() + part.size(), out);
    };
    parse(text.substr(0, 4), y);
    parse(text.substr(5, 2), m);
    parse(text.substr(8, 2), d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw fail();
    return Date{ymd};
}

inline std::string format_date(Date d) {
    const auto ymd = civil(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline constexpr std::array<std::string_view, 12> kMonthAbbrev{
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};

/// A calendar month of a specific year.
struct YearMonth {
    int year = 0;
    unsigned month = 1;  // 1..12

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;

    static YearMonth of(Date d) { return {year_of(d), month_of(d)}; }

    Date first_day() const { return make_date(year, month, 1); }
    Date last_day() const {
        const std::chrono::year_month_day_last ymdl{
            std::chrono::year{year}, std::chrono::month_day_last{std::chrono::month{month}}};
        return Date{ymdl};
    }
    int days() const { return static_cast<int>(days_between(first_day(), last_day())) + 1; }

    YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }
    YearMonth plus(int months) const {
        const int idx = year * 12 + static_cast<int>(month) - 1 + months;
        const int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
        return {y, static_cast<unsigned>(idx - y * 12) + 1};
    }

    std::string_view abbrev() const { return kMonthAbbrev[month - 1]; }
    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
        return buf;
    }
};

}  // namespace agbench
