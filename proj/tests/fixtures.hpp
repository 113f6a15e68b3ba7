#pragma once

// Random inputs shared by the module tests and the acceptance suite.

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "agbench/climate.hpp"
#include "agbench/evaluate.hpp"
#include "agbench/harmonics.hpp"

namespace fixtures {

using namespace agbench;

struct SeriesCase {
    SeasonWindow window;
    ObservationSeries series;
    std::array<double, 5> truth;
};

inline std::array<double, 5> random_coefficients(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> c(0.1, 1.0), amp(-0.3, 0.3);
    std::array<double, 5> b{c(gen), amp(gen), amp(gen), amp(gen), amp(gen)};
    // Keep the curve positive: amplitudes sum below c.
    const double total = std::fabs(b[1]) + std::fabs(b[2]) + std::fabs(b[3]) + std::fabs(b[4]);
    if (total >= b[0])
        for (int k = 1; k < 5; ++k) b[k] *= 0.9 * b[0] / total;
    return b;
}

inline SeasonWindow random_window(std::mt19937_64& gen, int min_days = 120, int max_days = 400) {
    std::uniform_int_distribution<int> year(1990, 2035), doy(0, 364), len(min_days, max_days);
    const Date start = add_days(make_date(year(gen), 1, 1), doy(gen));
    return SeasonWindow(start, add_days(start, len(gen)));
}

/// Distinct sorted dates inside the window, between 6 and 60 of them.
inline std::vector<Date> random_dates(std::mt19937_64& gen, const SeasonWindow& w) {
    const int span = days_between(w.start(), w.end());
    std::uniform_int_distribution<int> count(6, std::min(60, span + 1));
    std::vector<int> offsets(static_cast<std::size_t>(span + 1));
    for (int i = 0; i <= span; ++i) offsets[static_cast<std::size_t>(i)] = i;
    std::shuffle(offsets.begin(), offsets.end(), gen);
    offsets.resize(static_cast<std::size_t>(count(gen)));
    std::sort(offsets.begin(), offsets.end());
    std::vector<Date> dates;
    for (int o : offsets) dates.push_back(add_days(w.start(), o));
    return dates;
}

/// A series from random coefficients; noise_sd = 0 keeps it in the fitted family.
inline SeriesCase random_series(std::mt19937_64& gen, double noise_sd) {
    const auto w = random_window(gen);
    const auto b = random_coefficients(gen);
    const auto fit = HarmonicFit::from_coefficients(b, w, SpectralBand::NIR);
    std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
    ObservationSeries s{"u", SpectralBand::NIR, {}};
    for (Date d : random_dates(gen, w))
        s.samples.push_back({d, eval_harmonic(fit, d) + (noise_sd > 0.0 ? noise(gen) : 0.0)});
    return {w, s, b};
}

/// Random days of one month (all of them unless `partial`), tmin <= tmax.
inline std::vector<ClimateDaily> random_month(std::mt19937_64& gen, bool partial = false) {
    std::uniform_int_distribution<int> year(1980, 2040), month(1, 12);
    std::uniform_real_distribution<double> mid(-15.0, 38.0), range(0.0, 20.0), ppt(0.0, 40.0);
    std::bernoulli_distribution wet(0.35), keep(partial ? 0.7 : 1.0);
    const YearMonth m{year(gen), static_cast<unsigned>(month(gen))};
    std::vector<ClimateDaily> days;
    for (Date d = m.first_day(); d <= m.last_day(); d = add_days(d, 1)) {
        if (!keep(gen)) continue;
        const double c = mid(gen), r = range(gen);
        days.push_back({"u", d, c - r / 2.0, c + r / 2.0, wet(gen) ? ppt(gen) : 0.0});
    }
    if (days.empty()) days.push_back({"u", m.first_day(), 10.0, 20.0, 0.0});
    return days;
}

inline const std::vector<std::string>& east_states() {
    static const std::vector<std::string> s{"IL", "IN", "MI", "OH", "WI"};
    return s;
}
inline const std::vector<std::string>& west_states() {
    static const std::vector<std::string> s{"IA", "KS", "MN", "MO", "ND", "NE", "SD"};
    return s;
}

/// County and field rows over random states (some outside both regions) and years.
inline std::vector<SplitRow> random_split_rows(std::mt19937_64& gen) {
    std::vector<std::string> states = east_states();
    states.insert(states.end(), west_states().begin(), west_states().end());
    states.insert(states.end(), {"TX", "KY"});
    std::uniform_int_distribution<int> n_states(2, static_cast<int>(states.size())), n_years(2, 8),
        counties(1, 6), fields(0, 3);
    std::shuffle(states.begin(), states.end(), gen);
    states.resize(static_cast<std::size_t>(n_states(gen)));
    const int years = n_years(gen);
    std::vector<SplitRow> rows;
    int county = 0;
    for (const auto& st : states) {
        const int nc = counties(gen);
        for (int c = 0; c < nc; ++c) {
            const std::string cid = "c" + std::to_string(++county);
            const int nf = fields(gen);
            for (int y = 0; y < years; ++y) {
                rows.push_back({cid, 2015 + y, UnitLevel::county, st, cid, default_ecoregion(st)});
                for (int f = 0; f < nf; ++f)
                    rows.push_back({cid + "f" + std::to_string(f), 2015 + y, UnitLevel::field, st, cid,
                                    default_ecoregion(st)});
            }
        }
    }
    std::shuffle(rows.begin(), rows.end(), gen);
    return rows;
}

}  // namespace fixtures
