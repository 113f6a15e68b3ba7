#pragma once

// Monthly precipitation totals and growing degree days.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <numbers>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agbench/core/date.hpp"
#include "agbench/core/error.hpp"
#include "agbench/core/summation.hpp"
#include "agbench/dataset.hpp"

namespace agbench {

/// Lower (base) and upper (cap) biological temperature thresholds, °C.
struct GddThresholds {
    double t_base = 10.0;
    double t_cap = 30.0;

    void validate() const {
        if (!(t_base < t_cap)) throw std::invalid_argument("GDD thresholds need t_base < t_cap");
    }
};

enum class Crop : std::uint8_t { corn, soybean, winter_wheat };

constexpr std::string_view crop_name(Crop c) noexcept {
    switch (c) {
        case Crop::corn: return "corn";
        case Crop::soybean: return "soybean";
        default: return "winter_wheat";
    }
}

inline std::optional<Crop> parse_crop(std::string_view s) noexcept {
    for (Crop c : {Crop::corn, Crop::soybean, Crop::winter_wheat})
        if (crop_name(c) == s) return c;
    return std::nullopt;
}

/// Soybean 8/30 °C and winter wheat 0/26 °C; corn uses 10/30 °C (agronomic convention).
constexpr GddThresholds default_gdd_thresholds(Crop c) noexcept {
    switch (c) {
        case Crop::soybean: return {8.0, 30.0};
        case Crop::winter_wheat: return {0.0, 26.0};
        default: return {10.0, 30.0};
    }
}

/// True where the thresholds are a toolkit default rather than a published value.
constexpr bool gdd_thresholds_are_assumed(Crop c) noexcept { return c == Crop::corn; }

struct ClimateOptions {
    /// Divide degree-hours by 24 to report degree-days.
    bool gdd_per_day = false;
};

/// A monthly quantity and the fraction of the month's days it was computed from.
struct MonthlyValue {
    double value = 0.0;
    double coverage = 0.0;
};

struct MonthlyClimate {
    std::string unit_id;
    YearMonth month;
    double gdd = 0.0;
    double ppt = 0.0;
    double tmean = 0.0;
    double coverage = 0.0;
};

/**
 * Sinusoidal hourly temperature between the daily extremes: the midpoint at
 * hour 6, the maximum at hour 12 and the minimum at hour 24.
 */
inline double hourly_temp(double tmin_c, double tmax_c, int hour) {
    if (tmin_c > tmax_c) throw std::invalid_argument("hourly_temp: tmin_c > tmax_c");
    if (hour < 1 || hour > 24) throw std::invalid_argument("hourly_temp: hour outside 1..24");
    return (tmax_c + tmin_c) / 2.0 +
           (tmax_c - tmin_c) / 2.0 * std::sin(std::numbers::pi * (hour - 6) / 12.0);
}

namespace detail {

/// Checks the days share one calendar month without repeats; returns it.
inline YearMonth single_month(std::span<const ClimateDaily> days) {
    if (days.empty()) throw MissingClimate("empty day list");
    const YearMonth m = YearMonth::of(days.front().date);
    std::set<Date> seen;
    for (const auto& d : days) {
        if (YearMonth::of(d.date) != m)
            throw std::invalid_argument("climate days span more than one month (" + m.to_string() + " and " +
                                        format_date(d.date) + ")");
        if (!seen.insert(d.date).second)
            throw std::invalid_argument("climate day " + format_date(d.date) + " appears twice");
    }
    return m;
}

inline double coverage_of(std::span<const ClimateDaily> days, YearMonth m) {
    return static_cast<double>(days.size()) / static_cast<double>(m.days());
}

}  // namespace detail

/**
 * Degree-hours accumulated over a month: the sum over days and hours 1..24 of
 * max(0, min(T_h - t_base, t_cap - t_base)). Missing days contribute nothing
 * and lower the reported coverage.
 */
inline MonthlyValue monthly_gdd(std::span<const ClimateDaily> days, const GddThresholds& th,
                                const ClimateOptions& opts = {}) {
    th.validate();
    const YearMonth m = detail::single_month(days);
    double total = 0.0;
    for (const auto& d : days) {
        for (int h = 1; h <= 24; ++h) {
            const double th_c = hourly_temp(d.tmin_c, d.tmax_c, h);
            total += std::max(0.0, std::min(th_c - th.t_base, th.t_cap - th.t_base));
        }
    }
    if (opts.gdd_per_day) total /= 24.0;
    return {total, detail::coverage_of(days, m)};
}

/// Accumulated precipitation (mm), correctly rounded regardless of day order.
inline MonthlyValue monthly_ppt(std::span<const ClimateDaily> days) {
    const YearMonth m = detail::single_month(days);
    std::vector<double> ppt;
    ppt.reserve(days.size());
    for (const auto& d : days) ppt.push_back(d.ppt_mm);
    return {exact_sum(ppt), detail::coverage_of(days, m)};
}

/// Mean over days of (tmin + tmax) / 2.
inline MonthlyValue monthly_tmean(std::span<const ClimateDaily> days) {
    const YearMonth m = detail::single_month(days);
    std::vector<double> mid;
    mid.reserve(days.size());
    for (const auto& d : days) mid.push_back((d.tmin_c + d.tmax_c) / 2.0);
    return {exact_sum(mid) / static_cast<double>(days.size()), detail::coverage_of(days, m)};
}

/// The subrange of a date-sorted day list that falls in `month`.
inline std::span<const ClimateDaily> days_in_month(std::span<const ClimateDaily> sorted_days, YearMonth month) {
    const Date first = month.first_day();
    const Date last = month.last_day();
    auto lo = std::lower_bound(sorted_days.begin(), sorted_days.end(), first,
                               [](const ClimateDaily& c, Date d) { return c.date < d; });
    auto hi = std::upper_bound(lo, sorted_days.end(), last,
                               [](Date d, const ClimateDaily& c) { return d < c.date; });
    return {lo, hi};
}

inline MonthlyClimate summarize_month(std::span<const ClimateDaily> sorted_days, YearMonth month,
                                      const GddThresholds& th, const ClimateOptions& opts = {}) {
    const auto days = days_in_month(sorted_days, month);
    if (days.empty()) throw MissingClimate(month.to_string());
    const auto gdd = monthly_gdd(days, th, opts);
    return {days.front().unit_id, month, gdd.value, monthly_ppt(days).value, monthly_tmean(days).value,
            gdd.coverage};
}

}  // namespace agbench
