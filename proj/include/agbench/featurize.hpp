#pragma once

// Per-task predictor rows and the assembled feature table.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "agbench/climate.hpp"
#include "agbench/core/csv.hpp"
#include "agbench/core/parallel.hpp"
#include "agbench/core/rng.hpp"
#include "agbench/dataset.hpp"
#include "agbench/harmonics.hpp"
#include "agbench/indices.hpp"

namespace agbench {

enum class FeatureSet : std::uint8_t { AEF, RS };
enum class MissingPolicy : std::uint8_t { drop, impute_mean };

constexpr std::string_view feature_set_name(FeatureSet f) noexcept { return f == FeatureSet::AEF ? "AEF" : "RS"; }
constexpr std::string_view missing_policy_name(MissingPolicy p) noexcept {
    return p == MissingPolicy::drop ? "drop" : "impute_mean";
}

/// A season window expressed relative to the label year.
struct SeasonSpec {
    int start_year_offset = 0;  // 0: label year, -1: the year before
    unsigned start_month = 4;
    unsigned start_day = 1;
    unsigned end_month = 10;
    unsigned end_day = 31;

    SeasonWindow for_year(int label_year) const {
        return SeasonWindow(make_date(label_year + start_year_offset, start_month, start_day),
                            make_date(label_year, end_month, end_day));
    }

    std::string to_string() const {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%+d:%02u-%02u..%02u-%02u", start_year_offset, start_month, start_day,
                      end_month, end_day);
        return buf;
    }

    friend bool operator==(const SeasonSpec&, const SeasonSpec&) = default;
};

/**
 * Default windows: corn and soybean Apr 1 - Oct 31; winter wheat Sep 1 of the
 * prior year - Jul 15; cover crop Oct 1 of the prior year - May 31.
 */
inline SeasonSpec default_season(Task task, Crop crop) {
    if (task == Task::covercrop_class) return {-1, 10, 1, 5, 31};
    if (task == Task::tillage_ratio || task == Task::tillage_class) return {0, 4, 1, 6, 30};
    if (crop == Crop::winter_wheat) return {-1, 9, 1, 7, 15};
    return {0, 4, 1, 10, 31};
}

struct TaskConfig {
    Task task = Task::yield;
    Crop crop = Crop::corn;
    FeatureSet feature_set = FeatureSet::RS;
    MissingPolicy missing_policy = MissingPolicy::drop;
    std::optional<SeasonSpec> season;       // default_season() when unset
    std::optional<GddThresholds> gdd;       // default_gdd_thresholds() when unset
    bool gcvi_minus_one = false;
    bool gdd_per_day = false;
    double min_climate_coverage = 0.8;

    SeasonSpec effective_season() const { return season.value_or(default_season(task, crop)); }
    GddThresholds effective_gdd() const { return gdd.value_or(default_gdd_thresholds(crop)); }
    IndexOptions index_options() const { return {gcvi_minus_one}; }

    /// May-Sep for corn and soybean, Jan-Jun for winter wheat (yield only).
    std::vector<YearMonth> climate_months(int label_year) const {
        std::vector<YearMonth> out;
        if (task == Task::covercrop_class) {
            for (int i = 0; i < 8; ++i) out.push_back(YearMonth{label_year - 1, 10}.plus(i));
        } else if (task == Task::yield) {
            const unsigned first = crop == Crop::winter_wheat ? 1 : 5;
            const unsigned last = crop == Crop::winter_wheat ? 6 : 9;
            for (unsigned m = first; m <= last; ++m) out.push_back({label_year, m});
        }
        return out;
    }

    /// Months whose extrema become features: Apr-Jun (tillage), Oct-May (cover crop).
    std::vector<YearMonth> extrema_months(int label_year) const {
        std::vector<YearMonth> out;
        if (task == Task::covercrop_class) {
            for (int i = 0; i < 8; ++i) out.push_back(YearMonth{label_year - 1, 10}.plus(i));
        } else if (task == Task::tillage_ratio || task == Task::tillage_class) {
            for (unsigned m = 4; m <= 6; ++m) out.push_back({label_year, m});
        }
        return out;
    }

    void validate() const {
        effective_gdd().validate();
        const auto s = effective_season();
        (void)s.for_year(2020);  // throws on an impossible window
        if (!(min_climate_coverage >= 0.0 && min_climate_coverage <= 1.0))
            throw std::invalid_argument("min_climate_coverage must lie in [0, 1]");
        if (task == Task::covercrop_class) {
            const auto w = s.for_year(2020);
            for (YearMonth m : extrema_months(2020))
                if (m.last_day() < w.start() || m.first_day() > w.end())
                    throw std::invalid_argument("cover-crop season must overlap every month Oct-May");
        }
    }

    /// Stable key=value rendering; the basis of the config hash.
    std::string canonical() const {
        std::ostringstream o;
        const auto g = effective_gdd();
        o << "task=" << task_name(task) << "\ncrop=" << crop_name(crop) << "\nfeature_set="
          << feature_set_name(feature_set) << "\nmissing_policy=" << missing_policy_name(missing_policy)
          << "\nseason=" << effective_season().to_string() << "\ngdd_base=" << csv::format_double(g.t_base)
          << "\ngdd_cap=" << csv::format_double(g.t_cap) << "\ngcvi_minus_one=" << gcvi_minus_one
          << "\ngdd_per_day=" << gdd_per_day << "\nmin_climate_coverage=" << csv::format_double(min_climate_coverage)
          << '\n';
        return o.str();
    }

    /// Settings in effect that are toolkit assumptions rather than published values.
    std::vector<std::string> flagged_defaults() const {
        std::vector<std::string> out;
        if (feature_set == FeatureSet::RS && task == Task::yield && !gdd && gdd_thresholds_are_assumed(crop))
            out.push_back("gdd thresholds for corn assumed (base 10 C, cap 30 C)");
        if (!season && feature_set == FeatureSet::RS)
            out.push_back("season window assumed (" + effective_season().to_string() + ")");
        return out;
    }
};

inline std::string hex64(std::uint64_t h) {
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

// ---------------------------------------------------------------------------
// Column naming

namespace detail {
inline const std::array<std::string_view, 10>& harmonic_feature_suffixes() {
    static const std::array<std::string_view, 10> s{"c", "a1", "b1", "a2", "b2", "peak", "b30", "a30", "b30int", "a30int"};
    return s;
}
}  // namespace detail

inline std::vector<std::string> yield_feature_names(Crop crop) {
    std::vector<std::string> names;
    for (SpectralBand b : kVegetationBands)
        for (auto suffix : detail::harmonic_feature_suffixes())
            names.push_back(std::string(band_name(b)) + "_" + std::string(suffix));
    TaskConfig cfg;
    cfg.crop = crop;
    const auto months = cfg.climate_months(2000);
    for (YearMonth m : months) names.push_back("gdd_" + std::string(m.abbrev()));
    for (YearMonth m : months) names.push_back("ppt_" + std::string(m.abbrev()));
    return names;
}

inline std::vector<std::string> tillage_feature_names() {
    std::vector<std::string> names;
    for (SpectralBand b : kAllBands)
        for (unsigned m = 4; m <= 6; ++m)
            for (const char* which : {"min", "max"})
                names.push_back(std::string(band_name(b)) + "_" + std::string(kMonthAbbrev[m - 1]) + "_" + which);
    names.push_back("elev");
    return names;
}

inline std::vector<std::string> covercrop_feature_names() {
    std::vector<std::string> names;
    TaskConfig cfg;
    cfg.task = Task::covercrop_class;
    const auto months = cfg.extrema_months(2000);
    for (SpectralBand b : kVegetationBands)
        for (YearMonth m : months)
            for (const char* which : {"min", "max"})
                names.push_back(std::string(band_name(b)) + "_" + std::string(m.abbrev()) + "_" + which);
    for (YearMonth m : months) names.push_back("tmean_" + std::string(m.abbrev()));
    for (YearMonth m : months) names.push_back("ppt_" + std::string(m.abbrev()));
    return names;
}

inline std::vector<std::string> aef_feature_names(Task task) {
    std::vector<std::string> names;
    if (task == Task::covercrop_class)
        for (std::size_t i = 0; i < kEmbeddingDim; ++i) names.push_back("py_" + embedding_name(i));
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) names.push_back(embedding_name(i));
    return names;
}

inline std::vector<std::string> feature_names(const TaskConfig& cfg) {
    if (cfg.feature_set == FeatureSet::AEF) return aef_feature_names(cfg.task);
    switch (cfg.task) {
        case Task::yield: return yield_feature_names(cfg.crop);
        case Task::covercrop_class: return covercrop_feature_names();
        default: return tillage_feature_names();
    }
}

// ---------------------------------------------------------------------------
// Rows

/// One (unit, year) row; missing cells are NaN and `gaps` lists their causes.
struct FeatureRow {
    std::vector<double> values;
    std::vector<std::string> gaps;

    bool complete() const noexcept { return gaps.empty(); }
};

namespace detail {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Runs `fill`, turning a FeatureGap into `width` NaN cells plus a cause.
template <class Fill>
void guarded(FeatureRow& row, std::size_t width, Fill&& fill) {
    const std::size_t start = row.values.size();
    try {
        fill();
    } catch (const FeatureGap& gap) {
        row.values.resize(start);
        row.values.insert(row.values.end(), width, kMissing);
        row.gaps.push_back(gap.cause());
    }
}

inline const ObservationSeries& band_series(const BandSeriesMap& all, SpectralBand b, const std::string& unit) {
    auto it = all.find(b);
    if (it == all.end())
        throw InsufficientObservations(unit + "/" + std::string(band_name(b)) + " has no observations");
    return it->second;
}

/// Raw series plus whichever requested indices can be derived; failures are left out.
inline BandSeriesMap bands_with_indices(const BandSeriesMap& raw, std::span<const SpectralBand> kinds,
                                        const IndexOptions& opts, std::map<SpectralBand, std::string>& failures) {
    BandSeriesMap out;
    for (const auto& [band, s] : raw)
        if (is_raw(band)) out.emplace(band, s);
    for (SpectralBand k : kinds) {
        if (!is_derived(k)) continue;
        try {
            out.emplace(k, derive_index_series(raw, k, opts));
        } catch (const FeatureGap& gap) {
            failures.emplace(k, gap.what());
        }
    }
    return out;
}

inline void climate_cells(FeatureRow& row, std::span<const ClimateDaily> days, const std::vector<YearMonth>& months,
                          const TaskConfig& cfg, bool gdd_not_tmean) {
    const auto th = cfg.effective_gdd();
    const ClimateOptions copts{cfg.gdd_per_day};
    std::vector<double> first, second;
    for (YearMonth m : months) {
        const auto in_month = days_in_month(days, m);
        const bool usable = !in_month.empty() &&
                            static_cast<double>(in_month.size()) / m.days() >= cfg.min_climate_coverage;
        if (!usable) {
            first.push_back(kMissing);
            second.push_back(kMissing);
            row.gaps.push_back(in_month.empty() ? "missing_climate" : "low_climate_coverage");
            continue;
        }
        first.push_back(gdd_not_tmean ? monthly_gdd(in_month, th, copts).value : monthly_tmean(in_month).value);
        second.push_back(monthly_ppt(in_month).value);
    }
    row.values.insert(row.values.end(), first.begin(), first.end());
    row.values.insert(row.values.end(), second.begin(), second.end());
}

}  // namespace detail

/**
 * Per band (6 raw + NDVI + GCVI): five harmonic coefficients and five
 * phenology metrics, then monthly GDD and PPT. 90 columns for corn and
 * soybean, 92 for winter wheat.
 */
inline FeatureRow build_yield_features(const Dataset& ds, const std::string& unit_id, int year, const TaskConfig& cfg) {
    FeatureRow row;
    const SeasonWindow window = cfg.effective_season().for_year(year);
    std::map<SpectralBand, std::string> index_failures;
    const auto bands = detail::bands_with_indices(ds.series(unit_id), kVegetationBands, cfg.index_options(),
                                                  index_failures);
    for (SpectralBand b : kVegetationBands) {
        detail::guarded(row, 10, [&] {
            if (auto f = index_failures.find(b); f != index_failures.end())
                throw InsufficientObservations(f->second);
            const auto fit = fit_harmonic(detail::band_series(bands, b, unit_id), window);
            const auto ph = phenology_metrics(fit);
            for (double v : {fit.c, fit.a1, fit.b1, fit.a2, fit.b2, ph.peak_value, ph.b30, ph.a30, ph.b30_int,
                             ph.a30_int})
                row.values.push_back(v);
        });
    }
    detail::climate_cells(row, ds.climate(unit_id), cfg.climate_months(year), cfg, true);
    return row;
}

/// Monthly observed min/max for 11 bands over Apr-Jun, then elevation: 67 columns.
inline FeatureRow build_tillage_features(const Dataset& ds, const std::string& unit_id, int year,
                                         const TaskConfig& cfg) {
    FeatureRow row;
    std::map<SpectralBand, std::string> index_failures;
    const auto bands = detail::bands_with_indices(ds.series(unit_id), kAllBands, cfg.index_options(), index_failures);
    const auto months = cfg.extrema_months(year);
    for (SpectralBand b : kAllBands) {
        for (YearMonth m : months) {
            detail::guarded(row, 2, [&] {
                if (auto f = index_failures.find(b); f != index_failures.end())
                    throw MissingMonth(f->second);
                auto it = bands.find(b);
                if (it == bands.end())
                    throw MissingMonth(unit_id + "/" + std::string(band_name(b)) + " has no observations");
                const auto e = monthly_extrema(it->second, m);
                row.values.push_back(e.min);
                row.values.push_back(e.max);
            });
        }
    }
    const UnitMeta* u = ds.find_unit(unit_id);
    if (!u) throw Error("unknown unit " + unit_id);
    row.values.push_back(u->elevation_m);
    return row;
}

/**
 * Per band (6 raw + NDVI + GCVI): min/max of the fitted curve in each month
 * Oct-May (128), then monthly mean temperature and precipitation (16).
 */
inline FeatureRow build_covercrop_features(const Dataset& ds, const std::string& unit_id, int year,
                                           const TaskConfig& cfg) {
    FeatureRow row;
    const SeasonWindow window = cfg.effective_season().for_year(year);
    const auto months = cfg.extrema_months(year);
    std::map<SpectralBand, std::string> index_failures;
    const auto bands = detail::bands_with_indices(ds.series(unit_id), kVegetationBands, cfg.index_options(),
                                                  index_failures);
    for (SpectralBand b : kVegetationBands) {
        detail::guarded(row, 2 * months.size(), [&] {
            if (auto f = index_failures.find(b); f != index_failures.end())
                throw InsufficientObservations(f->second);
            const auto fit = fit_harmonic(detail::band_series(bands, b, unit_id), window);
            for (YearMonth m : months) {
                const auto e = monthly_extrema(fit, m);
                row.values.push_back(e.min);
                row.values.push_back(e.max);
            }
        });
    }
    detail::climate_cells(row, ds.climate(unit_id), cfg.climate_months(year), cfg, false);
    return row;
}

/// A00..A63 of the label year; cover crop prepends the prior year's vector.
inline FeatureRow build_aef_features(const Dataset& ds, const std::string& unit_id, int year, Task task) {
    FeatureRow row;
    auto append = [&](int y) {
        detail::guarded(row, kEmbeddingDim, [&] {
            const EmbeddingVector* e = ds.embedding(unit_id, y);
            if (!e) throw MissingEmbedding(unit_id + " " + std::to_string(y));
            row.values.insert(row.values.end(), e->values.begin(), e->values.end());
        });
    };
    if (task == Task::covercrop_class) append(year - 1);
    append(year);
    return row;
}

inline FeatureRow build_features(const Dataset& ds, const std::string& unit_id, int year, const TaskConfig& cfg) {
    if (cfg.feature_set == FeatureSet::AEF) return build_aef_features(ds, unit_id, year, cfg.task);
    switch (cfg.task) {
        case Task::yield: return build_yield_features(ds, unit_id, year, cfg);
        case Task::covercrop_class: return build_covercrop_features(ds, unit_id, year, cfg);
        default: return build_tillage_features(ds, unit_id, year, cfg);
    }
}

// ---------------------------------------------------------------------------
// Table

struct RowKey {
    std::string unit_id;
    int year = 0;

    friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

/// Per-cause row counts from assembling a table.
struct BuildLog {
    std::map<std::string, std::size_t> excluded;
    std::map<std::string, std::size_t> imputed;
    std::size_t labeled_rows = 0;
};

/// Feature matrix (row-major) with keys and paired labels.
class FeatureTable {
public:
    FeatureTable() = default;
    FeatureTable(std::vector<std::string> columns, Task task, FeatureSet fs)
        : columns_(std::move(columns)), task_(task), feature_set_(fs) {}

    std::size_t rows() const noexcept { return keys_.size(); }
    std::size_t cols() const noexcept { return columns_.size(); }

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<RowKey>& keys() const noexcept { return keys_; }
    const std::vector<double>& labels() const noexcept { return labels_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values_).subspan(r * cols(), cols());
    }

    Task task() const noexcept { return task_; }
    FeatureSet feature_set() const noexcept { return feature_set_; }
    const std::string& config_hash() const noexcept { return config_hash_; }
    void set_config_hash(std::string h) { config_hash_ = std::move(h); }
    const BuildLog& log() const noexcept { return log_; }
    BuildLog& log() noexcept { return log_; }

    void add_row(RowKey key, std::span<const double> values, double label) {
        if (values.size() != cols())
            throw SchemaError("row for " + key.unit_id + " has " + std::to_string(values.size()) +
                              " values, table has " + std::to_string(cols()) + " columns");
        keys_.push_back(std::move(key));
        values_.insert(values_.end(), values.begin(), values.end());
        labels_.push_back(label);
    }

    /// Copy of the listed rows, in the listed order.
    FeatureTable select(std::span<const std::size_t> rows) const {
        FeatureTable out(columns_, task_, feature_set_);
        out.config_hash_ = config_hash_;
        for (std::size_t r : rows) out.add_row(keys_.at(r), row(r), labels_[r]);
        return out;
    }

    /// Appends another table's rows; the column lists must agree exactly.
    void append(const FeatureTable& other) {
        if (other.columns_ != columns_) {
            std::size_t i = 0;
            while (i < columns_.size() && i < other.columns_.size() && columns_[i] == other.columns_[i]) ++i;
            throw SchemaError("column schemas differ at position " + std::to_string(i) + " ('" +
                              (i < columns_.size() ? columns_[i] : "<end>") + "' vs '" +
                              (i < other.columns_.size() ? other.columns_[i] : "<end>") + "')");
        }
        for (std::size_t r = 0; r < other.rows(); ++r) add_row(other.keys_[r], other.row(r), other.labels_[r]);
    }

    /// Replaces NaN cells, in place.
    void fill_missing(const std::vector<double>& column_values) {
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c = 0; c < cols(); ++c)
                if (std::isnan(values_[r * cols() + c])) values_[r * cols() + c] = column_values[c];
    }

private:
    std::vector<std::string> columns_;
    std::vector<RowKey> keys_;
    std::vector<double> values_;
    std::vector<double> labels_;
    Task task_ = Task::yield;
    FeatureSet feature_set_ = FeatureSet::RS;
    std::string config_hash_;
    BuildLog log_;
};

/**
 * One row per labeled (unit, year) of the configured task that survives the
 * missing policy, sorted by key. `drop` removes incomplete rows; `impute_mean`
 * fills each missing cell with its column's mean over complete rows. Rows are
 * built in parallel; the result does not depend on `threads`.
 */
inline FeatureTable assemble_table(const Dataset& ds, const TaskConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    std::vector<const LabelRecord*> labels;
    for (const auto& l : ds.labels())
        if (l.task == cfg.task) labels.push_back(&l);
    std::sort(labels.begin(), labels.end(), [](const LabelRecord* a, const LabelRecord* b) {
        return std::tie(a->unit_id, a->year) < std::tie(b->unit_id, b->year);
    });

    std::vector<FeatureRow> rows(labels.size());
    parallel_for(labels.size(), threads,
                 [&](std::size_t i) { rows[i] = build_features(ds, labels[i]->unit_id, labels[i]->year, cfg); });

    FeatureTable table(feature_names(cfg), cfg.task, cfg.feature_set);
    table.set_config_hash(hex64(fnv1a64(cfg.canonical())));
    table.log().labeled_rows = labels.size();

    std::vector<double> sums(table.cols(), 0.0);
    std::size_t complete = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = rows[i];
        if (row.values.size() != table.cols())
            throw SchemaError("internal: row width " + std::to_string(row.values.size()) + " != " +
                              std::to_string(table.cols()));
        if (row.complete()) {
            for (std::size_t c = 0; c < sums.size(); ++c) sums[c] += row.values[c];
            ++complete;
        }
        if (!row.complete() && cfg.missing_policy == MissingPolicy::drop) {
            ++table.log().excluded[row.gaps.front()];
            continue;
        }
        if (!row.complete()) ++table.log().imputed[row.gaps.front()];
        table.add_row({labels[i]->unit_id, labels[i]->year}, row.values, labels[i]->value);
    }

    if (table.rows() == 0)
        throw Error("no rows survive the missing-data policy (" + std::to_string(labels.size()) + " labeled)");
    if (cfg.missing_policy == MissingPolicy::impute_mean && complete < table.rows()) {
        if (complete == 0) throw Error("impute_mean needs at least one complete row");
        for (auto& s : sums) s /= static_cast<double>(complete);
        table.fill_missing(sums);
    }
    return table;
}

/// CSV export: `unit_id,year,label,<feature columns>`.
inline void write_feature_csv(const FeatureTable& t, std::ostream& out) {
    out << "unit_id,year,label";
    for (const auto& c : t.columns()) out << ',' << csv::escape(c);
    out << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out << csv::escape(t.keys()[r].unit_id) << ',' << t.keys()[r].year << ','
            << csv::format_double(t.labels()[r]);
        for (double v : t.row(r)) out << ',' << csv::format_double(v);
        out << '\n';
    }
}

}  // namespace agbench
