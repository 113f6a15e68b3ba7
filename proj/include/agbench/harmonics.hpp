#pragma once

// Second-order harmonic regression on irregular observation series:
//
//   y(t) = c + a1 cos(2πt) + b1 sin(2πt) + a2 cos(4πt) + b2 sin(4πt)
//
// with t in years (365.25 days) since January 1 of the season's start year.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "agbench/core/date.hpp"
#include "agbench/core/error.hpp"
#include "agbench/dataset.hpp"

namespace agbench {

inline constexpr double kDaysPerYear = 365.25;
inline constexpr std::size_t kHarmonicTerms = 5;
inline constexpr std::size_t kMinHarmonicObservations = 6;

/// Inclusive date range, at most 400 days long.
class SeasonWindow {
public:
    SeasonWindow(Date start, Date end) : start_(start), end_(end) {
        if (!(start < end))
            throw std::invalid_argument("season window start " + format_date(start) + " is not before end " +
                                        format_date(end));
        if (days_between(start, end) > 400)
            throw std::invalid_argument("season window longer than 400 days");
    }

    Date start() const noexcept { return start_; }
    Date end() const noexcept { return end_; }
    bool contains(Date d) const noexcept { return start_ <= d && d <= end_; }
    /// Where t = 0: January 1 of the start year.
    Date origin() const { return make_date(year_of(start_), 1, 1); }

    friend bool operator==(const SeasonWindow&, const SeasonWindow&) = default;

private:
    Date start_;
    Date end_;
};

inline double year_fraction(Date d, Date origin) {
    return static_cast<double>(days_between(origin, d)) / kDaysPerYear;
}

/// The five regressors at time t, in (c, a1, b1, a2, b2) order.
inline std::array<double, kHarmonicTerms> harmonic_basis(double t) {
    const double w = 2.0 * std::numbers::pi * t;
    return {1.0, std::cos(w), std::sin(w), std::cos(2.0 * w), std::sin(2.0 * w)};
}

struct HarmonicFit {
    double c = 0.0;
    double a1 = 0.0;
    double b1 = 0.0;
    double a2 = 0.0;
    double b2 = 0.0;
    SpectralBand band = SpectralBand::Red;
    SeasonWindow window;
    std::size_t n_obs = 0;
    Date t_origin;

    /// A curve with given coefficients over `w`, origin per the window.
    static HarmonicFit from_coefficients(const std::array<double, kHarmonicTerms>& coef, const SeasonWindow& w,
                                         SpectralBand band = SpectralBand::Red) {
        return HarmonicFit{coef[0], coef[1], coef[2], coef[3], coef[4], band, w, 0, w.origin()};
    }

    std::array<double, kHarmonicTerms> coefficients() const { return {c, a1, b1, a2, b2}; }
    double t(Date d) const { return year_fraction(d, t_origin); }
};

struct PhenologyMetrics {
    double peak_value = 0.0;
    Date peak_date;
    double b30 = 0.0;
    double a30 = 0.0;
    double b30_int = 0.0;  // value·years
    double a30_int = 0.0;
};

namespace detail {

/// Least squares by Householder QR. `a` is n×5 row-major and is destroyed.
inline std::array<double, kHarmonicTerms> householder_least_squares(std::vector<double>& a,
                                                                    std::vector<double>& y,
                                                                    const std::string& what) {
    constexpr std::size_t p = kHarmonicTerms;
    const std::size_t n = y.size();
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * p + j]; };

    double scale = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += at(i, j) * at(i, j);
        scale = std::max(scale, std::sqrt(s));
    }

    std::array<double, p> diag{};
    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, at(i, k));
        if (norm <= 1e-10 * scale) throw DegenerateDesign(what + ": design matrix is rank deficient");
        const double alpha = at(k, k) > 0.0 ? -norm : norm;
        // v = x - alpha e1, stored in place of column k.
        at(k, k) -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm2 += at(i, k) * at(i, k);
        for (std::size_t j = k + 1; j < p; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += at(i, k) * at(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) at(i, j) -= f * at(i, k);
        }
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += at(i, k) * y[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) y[i] -= f * at(i, k);
        diag[k] = alpha;
    }

    std::array<double, p> beta{};
    for (std::size_t k = p; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < p; ++j) s -= at(k, j) * beta[j];
        beta[k] = s / diag[k];
    }
    return beta;
}

}  // namespace detail

/**
 * Ordinary least-squares fit of the two-harmonic model to the samples dated
 * inside `window`. Needs at least six in-window samples.
 */
inline HarmonicFit fit_harmonic(const ObservationSeries& series, const SeasonWindow& window) {
    const Date origin = window.origin();
    std::vector<double> design;
    std::vector<double> y;
    for (const Sample& s : series.samples) {
        if (!window.contains(s.date)) continue;
        const auto row = harmonic_basis(year_fraction(s.date, origin));
        design.insert(design.end(), row.begin(), row.end());
        y.push_back(s.value);
    }
    const std::string what = series.unit_id + "/" + std::string(band_name(series.band));
    if (y.size() < kMinHarmonicObservations) {
        throw InsufficientObservations(what + " has " + std::to_string(y.size()) +
                                       " samples in the season window, need " +
                                       std::to_string(kMinHarmonicObservations));
    }
    const std::size_t n = y.size();
    const auto beta = detail::householder_least_squares(design, y, what);
    for (double b : beta)
        if (!std::isfinite(b)) throw DegenerateDesign(what + ": non-finite coefficients");
    return HarmonicFit{beta[0], beta[1], beta[2], beta[3], beta[4], series.band, window, n, origin};
}

inline double eval_harmonic_t(const HarmonicFit& fit, double t) {
    const auto x = harmonic_basis(t);
    return fit.c * x[0] + fit.a1 * x[1] + fit.b1 * x[2] + fit.a2 * x[3] + fit.b2 * x[4];
}

inline double eval_harmonic(const HarmonicFit& fit, Date date) { return eval_harmonic_t(fit, fit.t(date)); }

/// Exact integral of the fitted curve over [t0, t1], in value·years.
inline double harmonic_integral_t(const HarmonicFit& fit, double t0, double t1) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double four_pi = 4.0 * std::numbers::pi;
    auto antiderivative = [&](double t) {
        return fit.c * t + fit.a1 / two_pi * std::sin(two_pi * t) - fit.b1 / two_pi * std::cos(two_pi * t) +
               fit.a2 / four_pi * std::sin(four_pi * t) - fit.b2 / four_pi * std::cos(four_pi * t);
    };
    return antiderivative(t1) - antiderivative(t0);
}

inline double harmonic_integral(const HarmonicFit& fit, Date from, Date to) {
    if (!(from < to))
        throw std::invalid_argument("harmonic_integral: from " + format_date(from) + " is not before " +
                                    format_date(to));
    return harmonic_integral_t(fit, fit.t(from), fit.t(to));
}

/**
 * Peak of the curve on a daily grid over the fit window (earliest day wins
 * ties), values 30 days either side of it, and the areas under the curve
 * between those points. The ±30-day points are not clipped to the window.
 */
inline PhenologyMetrics phenology_metrics(const HarmonicFit& fit) {
    PhenologyMetrics m;
    m.peak_date = fit.window.start();
    m.peak_value = eval_harmonic(fit, m.peak_date);
    for (Date d = add_days(fit.window.start(), 1); d <= fit.window.end(); d = add_days(d, 1)) {
        const double v = eval_harmonic(fit, d);
        if (v > m.peak_value) {
            m.peak_value = v;
            m.peak_date = d;
        }
    }
    const Date before = add_days(m.peak_date, -30);
    const Date after = add_days(m.peak_date, 30);
    m.b30 = eval_harmonic(fit, before);
    m.a30 = eval_harmonic(fit, after);
    m.b30_int = harmonic_integral(fit, before, m.peak_date);
    m.a30_int = harmonic_integral(fit, m.peak_date, after);
    return m;
}

struct Extrema {
    double min = 0.0;
    double max = 0.0;
};

/// Min and max of the observed samples dated in `month`.
inline Extrema monthly_extrema(const ObservationSeries& series, YearMonth month) {
    bool any = false;
    Extrema e;
    for (const Sample& s : series.samples) {
        if (YearMonth::of(s.date) != month) continue;
        if (!any) {
            e = {s.value, s.value};
            any = true;
        } else {
            e.min = std::min(e.min, s.value);
            e.max = std::max(e.max, s.value);
        }
    }
    if (!any)
        throw MissingMonth(series.unit_id + "/" + std::string(band_name(series.band)) + " has no samples in " +
                           month.to_string());
    return e;
}

/// Min and max of the fitted curve on the daily grid of month ∩ fit window.
inline Extrema monthly_extrema(const HarmonicFit& fit, YearMonth month) {
    const Date from = std::max(month.first_day(), fit.window.start());
    const Date to = std::min(month.last_day(), fit.window.end());
    if (from > to)
        throw MissingMonth(month.to_string() + " does not overlap the fit window of " +
                           std::string(band_name(fit.band)));
    const double first = eval_harmonic(fit, from);
    Extrema e{first, first};
    for (Date d = add_days(from, 1); d <= to; d = add_days(d, 1)) {
        const double v = eval_harmonic(fit, d);
        e.min = std::min(e.min, v);
        e.max = std::max(e.max, v);
    }
    return e;
}

}  // namespace agbench
