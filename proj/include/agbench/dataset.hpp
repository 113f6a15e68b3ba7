#pragma once

// Shared data model and the CSV bundle loader.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "agbench/core/csv.hpp"
#include "agbench/core/date.hpp"
#include "agbench/core/error.hpp"

namespace agbench {

// ---------------------------------------------------------------------------
// Bands

enum class SpectralBand : std::uint8_t {
    Red, Green, Blue, NIR, SWIR1, SWIR2,  // raw surface reflectance
    NDVI, GCVI, NDTI, STI, CRC,           // derived indices
};

inline constexpr std::array<SpectralBand, 6> kRawBands{
    SpectralBand::Red,  SpectralBand::Green, SpectralBand::Blue,
    SpectralBand::NIR,  SpectralBand::SWIR1, SpectralBand::SWIR2};

/// Raw bands plus the two vegetation indices.
inline constexpr std::array<SpectralBand, 8> kVegetationBands{
    SpectralBand::Red,  SpectralBand::Green, SpectralBand::Blue, SpectralBand::NIR,
    SpectralBand::SWIR1, SpectralBand::SWIR2, SpectralBand::NDVI, SpectralBand::GCVI};

inline constexpr std::array<SpectralBand, 11> kAllBands{
    SpectralBand::Red,  SpectralBand::Green, SpectralBand::Blue, SpectralBand::NIR,
    SpectralBand::SWIR1, SpectralBand::SWIR2, SpectralBand::NDVI, SpectralBand::GCVI,
    SpectralBand::NDTI, SpectralBand::STI,   SpectralBand::CRC};

constexpr bool is_raw(SpectralBand b) noexcept { return b <= SpectralBand::SWIR2; }
constexpr bool is_derived(SpectralBand b) noexcept { return !is_raw(b); }

constexpr std::string_view band_name(SpectralBand b) noexcept {
    constexpr std::array<std::string_view, 11> names{"Red",  "Green", "Blue", "NIR",
                                                     "SWIR1", "SWIR2", "NDVI", "GCVI",
                                                     "NDTI", "STI",   "CRC"};
    return names[static_cast<std::size_t>(b)];
}

/// Exact, case-sensitive match against the canonical names.
inline std::optional<SpectralBand> parse_band(std::string_view name) noexcept {
    for (SpectralBand b : kAllBands)
        if (band_name(b) == name) return b;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Records

struct Sample {
    Date date;
    double value = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Dated samples of one band for one spatial unit, strictly increasing in date.
struct ObservationSeries {
    std::string unit_id;
    SpectralBand band = SpectralBand::Red;
    std::vector<Sample> samples;

    /// Throws Error if dates are not strictly increasing or a value is invalid.
    void validate() const {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = samples[i].value;
            if (!std::isfinite(v))
                throw Error("series " + unit_id + "/" + std::string(band_name(band)) + ": non-finite value");
            if (is_raw(band) && (v < 0.0 || v > 1.5))
                throw Error("series " + unit_id + "/" + std::string(band_name(band)) +
                            ": reflectance outside [0, 1.5]");
            if (i > 0 && samples[i].date <= samples[i - 1].date)
                throw Error("series " + unit_id + "/" + std::string(band_name(band)) +
                            ": dates not strictly increasing at " + format_date(samples[i].date));
        }
    }
};

struct ClimateDaily {
    std::string unit_id;
    Date date;
    double tmin_c = 0.0;
    double tmax_c = 0.0;
    double ppt_mm = 0.0;
};

inline constexpr std::size_t kEmbeddingDim = 64;

/// Two-digit embedding band name: A00..A63.
inline std::string embedding_name(std::size_t i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "A%02zu", i);
    return buf;
}

struct EmbeddingVector {
    std::string unit_id;
    int year = 0;
    std::array<double, kEmbeddingDim> values{};
};

enum class UnitLevel : std::uint8_t { county, field };
enum class Ecoregion : std::uint8_t { East, West, Other };

constexpr std::string_view level_name(UnitLevel l) noexcept {
    return l == UnitLevel::county ? "county" : "field";
}
constexpr std::string_view ecoregion_name(Ecoregion e) noexcept {
    switch (e) {
        case Ecoregion::East: return "East";
        case Ecoregion::West: return "West";
        default: return "Other";
    }
}

/// Eastern Temperate Forests → East, Great Plains → West, anything else → Other.
inline Ecoregion default_ecoregion(std::string_view state) noexcept {
    constexpr std::array<std::string_view, 5> east{"IL", "IN", "MI", "OH", "WI"};
    constexpr std::array<std::string_view, 7> west{"IA", "KS", "MN", "MO", "ND", "NE", "SD"};
    if (std::find(east.begin(), east.end(), state) != east.end()) return Ecoregion::East;
    if (std::find(west.begin(), west.end(), state) != west.end()) return Ecoregion::West;
    return Ecoregion::Other;
}

struct UnitMeta {
    std::string unit_id;
    UnitLevel level = UnitLevel::county;
    std::string state;
    std::string county_id;  // a field's containing county; a county's own id
    Ecoregion ecoregion = Ecoregion::Other;
    bool ecoregion_overridden = false;
    double elevation_m = 0.0;
};

enum class Task : std::uint8_t { yield, tillage_ratio, tillage_class, covercrop_class };

constexpr std::string_view task_name(Task t) noexcept {
    switch (t) {
        case Task::yield: return "yield";
        case Task::tillage_ratio: return "tillage_ratio";
        case Task::tillage_class: return "tillage_class";
        default: return "covercrop_class";
    }
}

inline std::optional<Task> parse_task(std::string_view s) noexcept {
    for (Task t : {Task::yield, Task::tillage_ratio, Task::tillage_class, Task::covercrop_class})
        if (task_name(t) == s) return t;
    return std::nullopt;
}

constexpr bool is_classification(Task t) noexcept {
    return t == Task::tillage_class || t == Task::covercrop_class;
}

struct LabelRecord {
    std::string unit_id;
    int year = 0;
    Task task = Task::yield;
    double value = 0.0;
};

struct Manifest {
    struct Source {
        std::string path;
        std::size_t rows = 0;
    };
    std::map<std::string, Source> files;  // keyed by file name

    std::size_t rows(const std::string& file) const {
        auto it = files.find(file);
        return it == files.end() ? 0 : it->second.rows;
    }
};

// ---------------------------------------------------------------------------
// Dataset

using BandSeriesMap = std::map<SpectralBand, ObservationSeries>;

/**
 * The five validated input tables, indexed for lookup. Immutable once built;
 * safe to share across threads.
 */
class Dataset {
public:
    Dataset() = default;

    /**
     * Validates and indexes in-memory tables. Errors name the offending
     * record (loaded bundles are validated earlier, with file and line).
     */
    static Dataset from_parts(std::vector<UnitMeta> units, std::vector<ObservationSeries> observations,
                              std::vector<ClimateDaily> climate, std::vector<EmbeddingVector> embeddings,
                              std::vector<LabelRecord> labels, Manifest manifest = {}) {
        Dataset ds;
        for (auto& u : units) {
            if (!std::isfinite(u.elevation_m)) throw Error("unit " + u.unit_id + ": non-finite elevation");
            if (!u.ecoregion_overridden && u.ecoregion != default_ecoregion(u.state))
                throw Error("unit " + u.unit_id + ": ecoregion inconsistent with state " + u.state);
            if (!ds.units_.emplace(u.unit_id, u).second) throw Error("duplicate unit " + u.unit_id);
        }
        for (auto& s : observations) {
            s.validate();
            auto& bands = ds.observations_[s.unit_id];
            if (bands.count(s.band))
                throw Error("duplicate series " + s.unit_id + "/" + std::string(band_name(s.band)));
            bands.emplace(s.band, std::move(s));
        }
        std::sort(climate.begin(), climate.end(), [](const ClimateDaily& a, const ClimateDaily& b) {
            return std::tie(a.unit_id, a.date) < std::tie(b.unit_id, b.date);
        });
        for (std::size_t i = 0; i < climate.size(); ++i) {
            const auto& c = climate[i];
            if (!std::isfinite(c.tmin_c) || !std::isfinite(c.tmax_c) || !std::isfinite(c.ppt_mm))
                throw Error("climate " + c.unit_id + " " + format_date(c.date) + ": non-finite value");
            if (c.tmin_c > c.tmax_c)
                throw Error("climate " + c.unit_id + " " + format_date(c.date) + ": tmin_c > tmax_c");
            if (c.ppt_mm < 0.0)
                throw Error("climate " + c.unit_id + " " + format_date(c.date) + ": negative ppt_mm");
            if (i > 0 && climate[i - 1].unit_id == c.unit_id && climate[i - 1].date == c.date)
                throw Error("duplicate climate day " + c.unit_id + " " + format_date(c.date));
        }
        ds.climate_ = std::move(climate);
        for (std::size_t i = 0; i < ds.climate_.size();) {
            std::size_t j = i;
            while (j < ds.climate_.size() && ds.climate_[j].unit_id == ds.climate_[i].unit_id) ++j;
            ds.climate_ranges_.emplace(ds.climate_[i].unit_id, std::make_pair(i, j));
            i = j;
        }
        for (auto& e : embeddings) {
            for (double v : e.values)
                if (!std::isfinite(v)) throw Error("embedding " + e.unit_id + ": non-finite value");
            auto key = std::make_pair(e.unit_id, e.year);
            if (!ds.embeddings_.emplace(key, std::move(e)).second)
                throw Error("duplicate embedding " + key.first + " " + std::to_string(key.second));
        }
        for (const auto& l : labels) {
            if (!ds.units_.count(l.unit_id)) throw Error("label for unknown unit " + l.unit_id);
            check_label_value(l);
        }
        std::set<std::tuple<std::string, int, Task>> seen;
        for (const auto& l : labels)
            if (!seen.emplace(l.unit_id, l.year, l.task).second)
                throw Error("duplicate label " + l.unit_id + " " + std::to_string(l.year));
        ds.labels_ = std::move(labels);
        ds.manifest_ = std::move(manifest);
        return ds;
    }

    /// Returns an empty string when the value suits the task, else the reason.
    static std::string label_problem(Task task, double value) {
        if (!std::isfinite(value)) return "non-finite label";
        if (task == Task::tillage_ratio && (value < 0.0 || value > 1.0)) return "tillage_ratio outside [0, 1]";
        if (is_classification(task) && value != 0.0 && value != 1.0) return "class label must be 0 or 1";
        return {};
    }

    const std::map<std::string, UnitMeta>& units() const noexcept { return units_; }
    const std::vector<LabelRecord>& labels() const noexcept { return labels_; }
    const std::vector<ClimateDaily>& climate() const noexcept { return climate_; }
    const std::map<std::pair<std::string, int>, EmbeddingVector>& embeddings() const noexcept {
        return embeddings_;
    }
    const std::map<std::string, BandSeriesMap>& observations() const noexcept { return observations_; }
    const Manifest& manifest() const noexcept { return manifest_; }

    const UnitMeta* find_unit(const std::string& id) const {
        auto it = units_.find(id);
        return it == units_.end() ? nullptr : &it->second;
    }

    /// All band series of one unit (empty map when the unit has none).
    const BandSeriesMap& series(const std::string& unit_id) const {
        static const BandSeriesMap empty;
        auto it = observations_.find(unit_id);
        return it == observations_.end() ? empty : it->second;
    }

    /// One unit's climate days, sorted by date.
    std::span<const ClimateDaily> climate(const std::string& unit_id) const {
        auto it = climate_ranges_.find(unit_id);
        if (it == climate_ranges_.end()) return {};
        return std::span<const ClimateDaily>(climate_).subspan(it->second.first,
                                                              it->second.second - it->second.first);
    }

    const EmbeddingVector* embedding(const std::string& unit_id, int year) const {
        auto it = embeddings_.find({unit_id, year});
        return it == embeddings_.end() ? nullptr : &it->second;
    }

    std::size_t observation_rows() const {
        std::size_t n = 0;
        for (const auto& [unit, bands] : observations_)
            for (const auto& [band, s] : bands) n += s.samples.size();
        return n;
    }

private:
    static void check_label_value(const LabelRecord& l) {
        if (auto why = label_problem(l.task, l.value); !why.empty())
            throw Error("label " + l.unit_id + " " + std::to_string(l.year) + ": " + why);
    }

    std::map<std::string, UnitMeta> units_;
    std::map<std::string, BandSeriesMap> observations_;
    std::vector<ClimateDaily> climate_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> climate_ranges_;
    std::map<std::pair<std::string, int>, EmbeddingVector> embeddings_;
    std::vector<LabelRecord> labels_;
    Manifest manifest_;
};

// ---------------------------------------------------------------------------
// Bundle I/O

inline const std::vector<std::string>& units_header() {
    static const std::vector<std::string> h{"unit_id", "level", "state", "county_id", "ecoregion", "elevation_m"};
    return h;
}
inline const std::vector<std::string>& observations_header() {
    static const std::vector<std::string> h{"unit_id", "band", "date", "value"};
    return h;
}
inline const std::vector<std::string>& climate_header() {
    static const std::vector<std::string> h{"unit_id", "date", "tmin_c", "tmax_c", "ppt_mm"};
    return h;
}
inline const std::vector<std::string>& embeddings_header() {
    static const std::vector<std::string> h = [] {
        std::vector<std::string> v{"unit_id", "year"};
        for (std::size_t i = 0; i < kEmbeddingDim; ++i) v.push_back(embedding_name(i));
        return v;
    }();
    return h;
}
inline const std::vector<std::string>& labels_header() {
    static const std::vector<std::string> h{"unit_id", "year", "task", "value"};
    return h;
}

namespace detail {

inline Date date_field(const csv::Reader& r, const std::vector<std::string>& f, std::size_t col) {
    try {
        return parse_date(f[col - 1]);
    } catch (const std::invalid_argument& e) {
        r.fail(col, e.what());
    }
}

inline std::vector<UnitMeta> read_units(csv::Reader& r) {
    r.expect_header(units_header());
    std::vector<UnitMeta> out;
    std::set<std::string> seen;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 6);
        UnitMeta u;
        u.unit_id = r.text(f, 1);
        if (f[1] == "county") u.level = UnitLevel::county;
        else if (f[1] == "field") u.level = UnitLevel::field;
        else r.fail(2, "level must be 'county' or 'field', got '" + f[1] + "'");
        u.state = r.text(f, 3);
        u.county_id = f[3].empty() && u.level == UnitLevel::county ? u.unit_id : r.text(f, 4);
        // Empty or "auto" derives the region from the state; "override:<Region>"
        // forces a region; a plain region must agree with the default map.
        const Ecoregion derived = default_ecoregion(u.state);
        std::string eco = f[4];
        bool overridden = false;
        if (eco.starts_with("override:")) {
            eco = eco.substr(9);
            overridden = true;
        }
        if (eco.empty() || eco == "auto") {
            if (overridden) r.fail(5, "override needs a region");
            u.ecoregion = derived;
        } else if (eco == "East" || eco == "West" || eco == "Other") {
            u.ecoregion = eco == "East" ? Ecoregion::East : eco == "West" ? Ecoregion::West : Ecoregion::Other;
            if (!overridden && u.ecoregion != derived) {
                r.fail(5, "ecoregion '" + eco + "' disagrees with state " + u.state + " (default " +
                              std::string(ecoregion_name(derived)) + "); write override:" + eco +
                              " to force it");
            }
        } else {
            r.fail(5, "unknown ecoregion '" + f[4] + "'");
        }
        u.ecoregion_overridden = overridden;
        u.elevation_m = r.real(f, 6);
        if (!seen.insert(u.unit_id).second) r.fail(1, "duplicate unit_id '" + u.unit_id + "'");
        out.push_back(std::move(u));
    }
    return out;
}

inline std::vector<ObservationSeries> read_observations(csv::Reader& r) {
    r.expect_header(observations_header());
    std::map<std::pair<std::string, SpectralBand>, std::vector<std::pair<Sample, std::size_t>>> grouped;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 4);
        const std::string& unit = r.text(f, 1);
        const auto band = parse_band(f[1]);
        if (!band) r.fail(2, "unknown band '" + f[1] + "'");
        Sample s{date_field(r, f, 3), r.real(f, 4)};
        if (is_raw(*band) && (s.value < 0.0 || s.value > 1.5))
            r.fail(4, "reflectance " + f[3] + " outside [0, 1.5]");
        grouped[{unit, *band}].emplace_back(s, r.line());
    }
    std::vector<ObservationSeries> out;
    out.reserve(grouped.size());
    for (auto& [key, rows] : grouped) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
        ObservationSeries s{key.first, key.second, {}};
        s.samples.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0 && rows[i].first.date == rows[i - 1].first.date) {
                throw DataError(r.name(), std::max(rows[i].second, rows[i - 1].second), 0,
                                "duplicate observation (" + key.first + ", " +
                                    std::string(band_name(key.second)) + ", " +
                                    format_date(rows[i].first.date) + ") also on line " +
                                    std::to_string(std::min(rows[i].second, rows[i - 1].second)));
            }
            s.samples.push_back(rows[i].first);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<ClimateDaily> read_climate(csv::Reader& r) {
    r.expect_header(climate_header());
    std::vector<ClimateDaily> out;
    std::map<std::pair<std::string, Date>, std::size_t> seen;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 5);
        ClimateDaily c{r.text(f, 1), date_field(r, f, 2), r.real(f, 3), r.real(f, 4), r.real(f, 5)};
        if (c.tmin_c > c.tmax_c) r.fail(0, "tmin_c " + f[2] + " exceeds tmax_c " + f[3]);
        if (c.ppt_mm < 0.0) r.fail(5, "negative ppt_mm " + f[4]);
        auto [it, fresh] = seen.emplace(std::make_pair(c.unit_id, c.date), r.line());
        if (!fresh)
            r.fail(0, "duplicate climate day (" + c.unit_id + ", " + f[1] + ") first seen on line " +
                          std::to_string(it->second));
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<EmbeddingVector> read_embeddings(csv::Reader& r) {
    r.expect_header(embeddings_header());
    std::vector<EmbeddingVector> out;
    std::map<std::pair<std::string, int>, std::size_t> seen;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 2 + kEmbeddingDim);
        EmbeddingVector e;
        e.unit_id = r.text(f, 1);
        e.year = r.integer(f, 2);
        for (std::size_t i = 0; i < kEmbeddingDim; ++i) e.values[i] = r.real(f, 3 + i);
        auto [it, fresh] = seen.emplace(std::make_pair(e.unit_id, e.year), r.line());
        if (!fresh)
            r.fail(0, "duplicate embedding (" + e.unit_id + ", " + f[1] + ") first seen on line " +
                          std::to_string(it->second));
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<LabelRecord> read_labels(csv::Reader& r, const std::vector<UnitMeta>& units) {
    r.expect_header(labels_header());
    std::set<std::string> known;
    for (const auto& u : units) known.insert(u.unit_id);
    std::vector<LabelRecord> out;
    std::map<std::tuple<std::string, int, Task>, std::size_t> seen;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 4);
        LabelRecord l;
        l.unit_id = r.text(f, 1);
        if (!known.count(l.unit_id)) r.fail(1, "unit_id '" + l.unit_id + "' not present in units.csv");
        l.year = r.integer(f, 2);
        const auto task = parse_task(f[2]);
        if (!task) r.fail(3, "unknown task '" + f[2] + "'");
        l.task = *task;
        l.value = r.real(f, 4);
        if (auto why = Dataset::label_problem(l.task, l.value); !why.empty()) r.fail(4, why);
        auto [it, fresh] = seen.emplace(std::make_tuple(l.unit_id, l.year, l.task), r.line());
        if (!fresh) r.fail(0, "duplicate label, first seen on line " + std::to_string(it->second));
        out.push_back(std::move(l));
    }
    return out;
}

}  // namespace detail

/**
 * Loads and validates a bundle directory holding units.csv, observations.csv,
 * climate.csv, embeddings.csv and labels.csv. Validation errors are
 * DataError with file and line; a missing file is an Error naming the path.
 */
inline Dataset load_dataset(const std::filesystem::path& bundle_dir) {
    namespace fs = std::filesystem;
    const std::array<std::string, 5> names{"units.csv", "observations.csv", "climate.csv",
                                           "embeddings.csv", "labels.csv"};
    for (const auto& n : names)
        if (!fs::is_regular_file(bundle_dir / n)) throw Error("missing file " + (bundle_dir / n).string());

    auto open = [&](const std::string& n) { return csv::Reader((bundle_dir / n).string(), n); };
    Manifest manifest;
    auto record = [&](const std::string& n, std::size_t rows) {
        manifest.files[n] = {(bundle_dir / n).string(), rows};
    };

    auto ur = open("units.csv");
    auto units = detail::read_units(ur);
    record("units.csv", units.size());

    auto orr = open("observations.csv");
    auto observations = detail::read_observations(orr);
    std::size_t obs_rows = 0;
    for (const auto& s : observations) obs_rows += s.samples.size();
    record("observations.csv", obs_rows);

    auto cr = open("climate.csv");
    auto climate = detail::read_climate(cr);
    record("climate.csv", climate.size());

    auto er = open("embeddings.csv");
    auto embeddings = detail::read_embeddings(er);
    record("embeddings.csv", embeddings.size());

    auto lr = open("labels.csv");
    auto labels = detail::read_labels(lr, units);
    record("labels.csv", labels.size());

    return Dataset::from_parts(std::move(units), std::move(observations), std::move(climate),
                               std::move(embeddings), std::move(labels), std::move(manifest));
}

/**
 * Deterministic text rendering of every table (sorted, shortest round-trip
 * numbers). Two datasets with equal canonical forms hold the same data.
 */
inline std::string canonical_form(const Dataset& ds) {
    std::ostringstream out;
    out << "[units]\n";
    for (const auto& [id, u] : ds.units())
        out << id << ',' << level_name(u.level) << ',' << u.state << ',' << u.county_id << ','
            << ecoregion_name(u.ecoregion) << (u.ecoregion_overridden ? "!" : "") << ','
            << csv::format_double(u.elevation_m) << '\n';
    out << "[observations]\n";
    for (const auto& [id, bands] : ds.observations())
        for (const auto& [band, s] : bands)
            for (const auto& smp : s.samples)
                out << id << ',' << band_name(band) << ',' << format_date(smp.date) << ','
                    << csv::format_double(smp.value) << '\n';
    out << "[climate]\n";
    for (const auto& c : ds.climate())
        out << c.unit_id << ',' << format_date(c.date) << ',' << csv::format_double(c.tmin_c) << ','
            << csv::format_double(c.tmax_c) << ',' << csv::format_double(c.ppt_mm) << '\n';
    out << "[embeddings]\n";
    for (const auto& [key, e] : ds.embeddings()) {
        out << key.first << ',' << key.second;
        for (double v : e.values) out << ',' << csv::format_double(v);
        out << '\n';
    }
    out << "[labels]\n";
    auto labels = ds.labels();
    std::sort(labels.begin(), labels.end(), [](const LabelRecord& a, const LabelRecord& b) {
        return std::tie(a.unit_id, a.year, a.task) < std::tie(b.unit_id, b.year, b.task);
    });
    for (const auto& l : labels)
        out << l.unit_id << ',' << l.year << ',' << task_name(l.task) << ','
            << csv::format_double(l.value) << '\n';
    return out.str();
}

/// Mean of the values whose mask entry is 1 (zonal aggregation of exported pixels).
inline double masked_mean(std::span<const double> pixel_values, std::span<const std::uint8_t> keep_mask) {
    if (pixel_values.size() != keep_mask.size())
        throw std::invalid_argument("masked_mean: values and mask differ in length");
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < pixel_values.size(); ++i) {
        if (keep_mask[i] > 1) throw std::invalid_argument("masked_mean: mask entries must be 0 or 1");
        if (keep_mask[i] == 1) {
            sum += pixel_values[i];
            ++kept;
        }
    }
    if (kept == 0) throw Error("no valid pixels");
    return sum / static_cast<double>(kept);
}

}  // namespace agbench
