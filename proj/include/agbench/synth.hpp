#pragma once

// Seeded synthetic bundles with known generating functions.
//
// Each (unit, year) draws six latent factors: vigor, timing, residue,
// brightness, weather, chlorophyll. Raw-band curves are two-harmonic functions of time in
// the season window's frame, so noise-free samples are exactly in the fitted
// family. Labels are a linear map of named features computed on the
// noise-free samples, plus Gaussian noise of known variance. Embeddings are a
// low-rank linear map of the latents with an optional region offset.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "agbench/core/csv.hpp"
#include "agbench/core/date.hpp"
#include "agbench/core/error.hpp"
#include "agbench/core/parallel.hpp"
#include "agbench/core/rng.hpp"
#include "agbench/dataset.hpp"
#include "agbench/featurize.hpp"
#include "agbench/harmonics.hpp"

namespace agbench {

inline constexpr std::size_t kLatentFactors = 6;

struct LabelTerm {
    std::string feature;
    double weight = 1.0;
};

struct SynthSpec {
    Task task = Task::yield;
    Crop crop = Crop::corn;
    std::size_t n_counties = 24;
    std::size_t fields_per_county = 0;
    /// Counties are dealt to states round-robin; ecoregions follow the default map.
    std::vector<std::string> states{"IL", "IA", "IN", "KS", "MI", "MN", "OH", "MO", "WI", "ND", "NE", "SD"};
    std::vector<int> years{2019, 2020, 2021, 2022};

    double revisit_min_days = 8.0;
    double revisit_max_days = 16.0;
    double dropout = 0.1;   // chance a scene is lost
    double gap_rate = 0.0;  // chance a unit-year keeps only its first 3 scenes
    double obs_sigma = 0.0;
    double field_spread = 0.5;

    /// Empty: the task's default term (GCVI_peak, NDTI_may_max or GCVI_mar_max).
    std::vector<LabelTerm> label_terms;
    double label_intercept = 0.0;
    /// Noise sd; when unset it follows from r2_ceiling.
    std::optional<double> label_sigma;
    double r2_ceiling = 0.9;

    double embedding_sigma = 0.05;
    double region_offset = 0.0;

    TaskConfig task_config() const {
        TaskConfig cfg;
        cfg.task = task;
        cfg.crop = crop;
        return cfg;
    }

    std::vector<LabelTerm> effective_terms() const {
        if (!label_terms.empty()) return label_terms;
        switch (task) {
            case Task::yield: return {{"GCVI_peak", 1.0}};
            case Task::covercrop_class: return {{"GCVI_mar_max", 1.0}};
            default: return {{"NDTI_may_max", 1.0}};
        }
    }

    void validate() const {
        if (n_counties == 0) throw ConfigError("synth: n_counties must be positive");
        if (states.empty()) throw ConfigError("synth: no states");
        if (years.empty()) throw ConfigError("synth: no years");
        if (!(revisit_min_days >= 1.0 && revisit_min_days <= revisit_max_days))
            throw ConfigError("synth: need 1 <= revisit_min_days <= revisit_max_days");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("synth: dropout must lie in [0, 1)");
        if (!(gap_rate >= 0.0 && gap_rate <= 1.0)) throw ConfigError("synth: gap_rate must lie in [0, 1]");
        for (double s : {obs_sigma, field_spread, embedding_sigma})
            if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("synth: sigmas must be finite and >= 0");
        if (label_sigma && !(*label_sigma >= 0.0)) throw ConfigError("synth: label_sigma must be >= 0");
        if (!label_sigma && !(r2_ceiling > 0.0 && r2_ceiling <= 1.0))
            throw ConfigError("synth: r2_ceiling must lie in (0, 1]");
        if (!std::isfinite(region_offset)) throw ConfigError("synth: region_offset must be finite");
        const auto names = feature_names(task_config());
        for (const auto& t : effective_terms())
            if (std::find(names.begin(), names.end(), t.feature) == names.end())
                throw ConfigError("synth: label term '" + t.feature + "' is not a " + std::string(task_name(task)) +
                                  " feature");
        task_config().validate();
    }
};

struct TruthRecord {
    std::string kind;  // coef, feature, label_signal, summary
    std::string unit_id;
    int year = 0;
    std::string name;
    double value = 0.0;
};

struct SynthSummary {
    double signal_variance = 0.0;
    double label_sigma = 0.0;
    double label_variance = 0.0;  // signal + noise, yield only
    double r2_ceiling = 0.0;
};

struct SynthBundle {
    std::vector<UnitMeta> units;
    std::vector<ObservationSeries> observations;
    std::vector<ClimateDaily> climate;
    std::vector<EmbeddingVector> embeddings;
    std::vector<LabelRecord> labels;
    std::vector<TruthRecord> truth;
    SynthSummary summary;

    std::size_t observation_rows() const {
        std::size_t n = 0;
        for (const auto& s : observations) n += s.samples.size();
        return n;
    }

    Dataset dataset() const { return Dataset::from_parts(units, observations, climate, embeddings, labels); }
};

namespace detail {

inline constexpr std::array<double, 12> kMonthlyMeanTemp{-6, -3, 3, 10, 16, 21, 24, 23, 18, 11, 4, -3};

struct BandShape {
    double c, amp, vigor, residue, brightness, chlorophyll;
};

// Red, Green, Blue, NIR, SWIR1, SWIR2
inline constexpr std::array<BandShape, 6> kBandShapes{{
    {0.08, -0.04, 0.0, 0.0, 0.01, 0.0},
    {0.09, -0.02, 0.0, 0.0, 0.0, -0.01},
    {0.06, -0.02, 0.0, 0.0, 0.01, 0.0},
    {0.30, 0.12, 0.04, 0.0, 0.0, 0.0},
    {0.22, -0.05, 0.0, 0.02, 0.01, 0.0},
    {0.15, -0.04, 0.0, 0.015, 0.01, 0.0},
}};

inline double peak_phase(Task task, Crop crop) {
    if (task == Task::covercrop_class) return 0.30;
    if (task == Task::yield && crop == Crop::winter_wheat) return 0.37;
    return 0.55;
}

using Latents = std::array<double, kLatentFactors>;

/// Generating coefficients (c, a1, b1, a2, b2) of each raw band.
inline std::array<std::array<double, kHarmonicTerms>, 6> band_coefficients(const Latents& z, double phase) {
    std::array<std::array<double, kHarmonicTerms>, 6> out{};
    const double tp = phase + 0.02 * z[1];
    const double tp2 = tp + 0.05;
    const double w = 2.0 * std::numbers::pi;
    for (std::size_t b = 0; b < 6; ++b) {
        const auto& s = kBandShapes[b];
        const double c = s.c + s.brightness * z[3];
        const double a = s.amp + s.vigor * z[0] + s.residue * z[2] + s.chlorophyll * z[5];
        const double h = 0.1 * a;
        out[b] = {c, a * std::cos(w * tp), a * std::sin(w * tp), h * std::cos(2.0 * w * tp2),
                  h * std::sin(2.0 * w * tp2)};
    }
    return out;
}

struct UnitPlan {
    UnitMeta meta;
    std::uint64_t seed = 0;
    std::string parent;  // county of a field
};

inline Latents draw_latents(std::uint64_t seed, const std::string& tag, int year) {
    Rng rng(derive_seed(derive_seed(seed, tag), static_cast<std::uint64_t>(static_cast<std::int64_t>(year))));
    Latents z{};
    for (double& v : z) v = rng.normal();
    return z;
}

inline double clip_latent(double v) { return std::clamp(v, -2.5, 2.5); }

/// County latents mix a persistent unit effect with a yearly one; fields add their own spread.
inline Latents unit_latents(std::uint64_t seed, const UnitPlan& u, int year, double field_spread) {
    const std::string& county = u.parent.empty() ? u.meta.unit_id : u.parent;
    const Latents persistent = draw_latents(seed, "persistent:" + county, 0);
    const Latents yearly = draw_latents(seed, "yearly:" + county, year);
    Latents z{};
    for (std::size_t l = 0; l < kLatentFactors; ++l) z[l] = 0.7 * persistent[l] + 0.7 * yearly[l];
    if (!u.parent.empty()) {
        const Latents own = draw_latents(seed, "field:" + u.meta.unit_id, year);
        for (std::size_t l = 0; l < kLatentFactors; ++l) z[l] += field_spread * own[l];
    }
    for (double& v : z) v = clip_latent(v);
    return z;
}

struct UnitYearSamples {
    std::vector<Date> dates;
    std::vector<Date> full_dates;
    std::array<std::array<double, kHarmonicTerms>, 6> coef{};
};

}  // namespace detail

/**
 * Builds the bundle in memory. Every random draw derives from `seed` and the
 * unit (and year) it belongs to, so the result does not depend on `threads`.
 */
inline SynthBundle generate_bundle(const SynthSpec& spec, std::uint64_t seed, unsigned threads = 1) {
    spec.validate();
    const TaskConfig cfg = spec.task_config();
    const double phase = detail::peak_phase(spec.task, spec.crop);

    std::vector<detail::UnitPlan> plans;
    for (std::size_t i = 0; i < spec.n_counties; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "c%04zu", i + 1);
        detail::UnitPlan county;
        county.meta.unit_id = id;
        county.meta.level = UnitLevel::county;
        county.meta.state = spec.states[i % spec.states.size()];
        county.meta.county_id = id;
        county.meta.ecoregion = default_ecoregion(county.meta.state);
        Rng rng(derive_seed(seed, "elevation:" + county.meta.unit_id));
        county.meta.elevation_m = rng.uniform(150.0, 450.0);
        plans.push_back(county);
        for (std::size_t f = 0; f < spec.fields_per_county; ++f) {
            char fid[48];
            std::snprintf(fid, sizeof fid, "%sf%03zu", id, f + 1);
            detail::UnitPlan field = county;
            field.meta.unit_id = fid;
            field.meta.level = UnitLevel::field;
            field.parent = id;
            Rng frng(derive_seed(seed, "elevation:" + field.meta.unit_id));
            field.meta.elevation_m = county.meta.elevation_m + frng.normal(0.0, 5.0);
            plans.push_back(field);
        }
    }

    std::vector<int> years = spec.years;
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    std::vector<int> embedding_years = years;
    if (spec.task == Task::covercrop_class)
        for (int y : years) embedding_years.push_back(y - 1);
    std::sort(embedding_years.begin(), embedding_years.end());
    embedding_years.erase(std::unique(embedding_years.begin(), embedding_years.end()), embedding_years.end());

    // Embedding map: each dimension leans on one latent, plus a dense mix.
    std::array<std::array<double, kLatentFactors>, kEmbeddingDim> emb_map{};
    std::array<double, kEmbeddingDim> region_dir{};
    {
        Rng rng(derive_seed(seed, "embedding_map"));
        for (std::size_t j = 0; j < kEmbeddingDim; ++j) {
            for (std::size_t l = 0; l < kLatentFactors; ++l) emb_map[j][l] = 0.3 * rng.normal();
            emb_map[j][j % kLatentFactors] += 1.0;
        }
        for (double& v : region_dir) v = rng.normal();
    }

    struct UnitOutput {
        std::vector<ObservationSeries> noisy, clean, full;
        std::vector<ClimateDaily> climate;
        std::vector<EmbeddingVector> embeddings;
        std::vector<TruthRecord> coefs;
    };
    std::vector<UnitOutput> outputs(plans.size());

    parallel_for(plans.size(), threads, [&](std::size_t ui) {
        const auto& plan = plans[ui];
        const std::string& uid = plan.meta.unit_id;
        UnitOutput& out = outputs[ui];
        Rng rng(derive_seed(seed, "unit:" + uid));
        const double revisit = rng.uniform(spec.revisit_min_days, spec.revisit_max_days);

        std::array<ObservationSeries, 6> noisy, clean, full;
        for (std::size_t b = 0; b < 6; ++b) {
            for (auto* s : {&noisy[b], &clean[b], &full[b]}) {
                s->unit_id = uid;
                s->band = kRawBands[b];
            }
        }

        for (int year : years) {
            const SeasonWindow window = cfg.effective_season().for_year(year);
            const auto z = detail::unit_latents(seed, plan, year, spec.field_spread);
            const auto coef = detail::band_coefficients(z, phase);
            for (std::size_t b = 0; b < 6; ++b) {
                static constexpr std::array<std::string_view, 5> names{"c", "a1", "b1", "a2", "b2"};
                for (std::size_t k = 0; k < kHarmonicTerms; ++k)
                    out.coefs.push_back({"coef", uid, year, std::string(band_name(kRawBands[b])) + "_" +
                                                                std::string(names[k]), coef[b][k]});
            }
            const auto origin = window.origin();
            std::vector<Date> all_dates;
            Date d = add_days(window.start(), static_cast<int>(rng.below(static_cast<std::uint64_t>(revisit))));
            while (d <= window.end()) {
                all_dates.push_back(d);
                const double step = std::max(1.0, std::round(revisit * rng.uniform(0.6, 1.4)));
                d = add_days(d, static_cast<int>(step));
            }
            std::vector<Date> kept;
            for (Date dd : all_dates)
                if (!rng.bernoulli(spec.dropout)) kept.push_back(dd);
            if (rng.bernoulli(spec.gap_rate) && kept.size() > 3) kept.resize(3);

            for (Date dd : all_dates) {
                const double t = year_fraction(dd, origin);
                const bool is_kept = std::binary_search(kept.begin(), kept.end(), dd);
                for (std::size_t b = 0; b < 6; ++b) {
                    const auto h = HarmonicFit::from_coefficients(coef[b], window, kRawBands[b]);
                    const double v = eval_harmonic_t(h, t);
                    full[b].samples.push_back({dd, v});
                    if (!is_kept) continue;
                    clean[b].samples.push_back({dd, v});
                    double obs = v + (spec.obs_sigma > 0.0 ? rng.normal(0.0, spec.obs_sigma) : 0.0);
                    noisy[b].samples.push_back({dd, std::clamp(obs, 0.001, 1.5)});
                }
            }

            for (YearMonth m : cfg.climate_months(year)) {
                const double normal_temp = detail::kMonthlyMeanTemp[m.month - 1] + 1.5 * z[4];
                for (Date day = m.first_day(); day <= m.last_day(); day = add_days(day, 1)) {
                    const double mid = normal_temp + rng.normal(0.0, 2.5);
                    const double range = rng.uniform(6.0, 14.0);
                    const bool wet = rng.bernoulli(0.3);
                    const double ppt = wet ? -7.0 * std::log1p(-rng.uniform()) : 0.0;
                    out.climate.push_back({uid, day, mid - range / 2.0, mid + range / 2.0, ppt});
                }
            }
        }

        for (int year : embedding_years) {
            const auto z = detail::unit_latents(seed, plan, year, spec.field_spread);
            Rng erng(derive_seed(derive_seed(seed, "embedding:" + uid), static_cast<std::uint64_t>(year)));
            const double side = plan.meta.ecoregion == Ecoregion::East   ? 1.0
                                : plan.meta.ecoregion == Ecoregion::West ? -1.0
                                                                         : 0.0;
            EmbeddingVector e{uid, year, {}};
            for (std::size_t j = 0; j < kEmbeddingDim; ++j) {
                double v = spec.region_offset * side * region_dir[j];
                for (std::size_t l = 0; l < kLatentFactors; ++l) v += emb_map[j][l] * z[l];
                e.values[j] = v + (spec.embedding_sigma > 0.0 ? erng.normal(0.0, spec.embedding_sigma) : 0.0);
            }
            out.embeddings.push_back(e);
        }

        for (std::size_t b = 0; b < 6; ++b) {
            if (!noisy[b].samples.empty()) out.noisy.push_back(std::move(noisy[b]));
            if (!clean[b].samples.empty()) out.clean.push_back(std::move(clean[b]));
            if (!full[b].samples.empty()) out.full.push_back(std::move(full[b]));
        }
    });

    SynthBundle bundle;
    std::vector<ObservationSeries> clean_obs, full_obs;
    for (std::size_t ui = 0; ui < plans.size(); ++ui) {
        bundle.units.push_back(plans[ui].meta);
        auto& o = outputs[ui];
        for (auto& s : o.noisy) bundle.observations.push_back(std::move(s));
        for (auto& s : o.clean) clean_obs.push_back(std::move(s));
        for (auto& s : o.full) full_obs.push_back(std::move(s));
        bundle.climate.insert(bundle.climate.end(), o.climate.begin(), o.climate.end());
        bundle.embeddings.insert(bundle.embeddings.end(), o.embeddings.begin(), o.embeddings.end());
        bundle.truth.insert(bundle.truth.end(), o.coefs.begin(), o.coefs.end());
    }

    // True features: noise-free samples on the realized dates; rows where a
    // label term is missing there fall back to the full, undropped cadence.
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& p : plans)
        for (int y : years) keys.emplace_back(p.meta.unit_id, y);
    std::vector<LabelRecord> no_labels;
    const Dataset clean_ds = Dataset::from_parts(bundle.units, clean_obs, bundle.climate, {}, no_labels);
    const Dataset full_ds = Dataset::from_parts(bundle.units, full_obs, bundle.climate, {}, no_labels);
    const auto names = feature_names(cfg);
    const auto terms = spec.effective_terms();
    std::vector<std::size_t> term_cols;
    for (const auto& t : terms)
        term_cols.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), t.feature) - names.begin()));

    std::vector<FeatureRow> truth_rows(keys.size());
    std::vector<double> signal(keys.size());
    parallel_for(keys.size(), threads, [&](std::size_t i) {
        truth_rows[i] = build_features(clean_ds, keys[i].first, keys[i].second, cfg);
        const FeatureRow* source = &truth_rows[i];
        FeatureRow fallback;
        for (std::size_t c : term_cols) {
            if (std::isnan(truth_rows[i].values[c])) {
                fallback = build_features(full_ds, keys[i].first, keys[i].second, cfg);
                source = &fallback;
                break;
            }
        }
        double s = spec.label_intercept;
        for (std::size_t k = 0; k < terms.size(); ++k) s += terms[k].weight * source->values[term_cols[k]];
        signal[i] = s;
    });

    double mean = 0.0;
    for (double s : signal) mean += s;
    mean /= static_cast<double>(signal.size());
    double var = 0.0;
    for (double s : signal) var += (s - mean) * (s - mean);
    var /= static_cast<double>(signal.size());
    if (!std::isfinite(var)) throw Error("synth: label signal is not finite");

    SynthSummary& sum = bundle.summary;
    sum.signal_variance = var;
    const bool regression = spec.task == Task::yield;
    // Classification and ratio labels work on the standardized signal.
    const double scale_var = regression ? var : 1.0;
    if (spec.label_sigma) {
        sum.label_sigma = *spec.label_sigma;
    } else {
        sum.label_sigma = std::sqrt(scale_var * (1.0 / spec.r2_ceiling - 1.0));
    }
    sum.r2_ceiling = scale_var + sum.label_sigma * sum.label_sigma > 0.0
                         ? scale_var / (scale_var + sum.label_sigma * sum.label_sigma)
                         : 1.0;
    sum.label_variance = regression ? var + sum.label_sigma * sum.label_sigma : 0.0;
    const double sd = std::sqrt(var);

    for (std::size_t i = 0; i < keys.size(); ++i) {
        Rng rng(derive_seed(derive_seed(seed, "label:" + keys[i].first), static_cast<std::uint64_t>(keys[i].second)));
        const double noise = sum.label_sigma > 0.0 ? rng.normal(0.0, sum.label_sigma) : 0.0;
        const double standardized = sd > 0.0 ? (signal[i] - mean) / sd : 0.0;
        double value = 0.0;
        switch (spec.task) {
            case Task::yield: value = signal[i] + noise; break;
            case Task::tillage_ratio: value = 1.0 / (1.0 + std::exp(-1.5 * (standardized + noise))); break;
            default: value = standardized + noise > 0.0 ? 1.0 : 0.0; break;
        }
        bundle.labels.push_back({keys[i].first, keys[i].second, spec.task, value});
        for (std::size_t c = 0; c < names.size(); ++c)
            bundle.truth.push_back({"feature", keys[i].first, keys[i].second, names[c], truth_rows[i].values[c]});
        bundle.truth.push_back({"label_signal", keys[i].first, keys[i].second, "signal", signal[i]});
    }

    auto summary = [&](const std::string& name, double v) { bundle.truth.push_back({"summary", "", 0, name, v}); };
    summary("signal_mean", mean);
    summary("signal_variance", sum.signal_variance);
    summary("label_sigma", sum.label_sigma);
    if (regression) summary("label_variance", sum.label_variance);
    summary("r2_ceiling", sum.r2_ceiling);
    summary("rows_units", static_cast<double>(bundle.units.size()));
    summary("rows_observations", static_cast<double>(bundle.observation_rows()));
    summary("rows_climate", static_cast<double>(bundle.climate.size()));
    summary("rows_embeddings", static_cast<double>(bundle.embeddings.size()));
    summary("rows_labels", static_cast<double>(bundle.labels.size()));
    return bundle;
}

inline const std::vector<std::string>& truth_header() {
    static const std::vector<std::string> h{"kind", "unit_id", "year", "name", "value"};
    return h;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

inline void write_header(std::ostream& out, const std::vector<std::string>& h) {
    for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
    out << '\n';
}

}  // namespace detail

/// Writes the five bundle CSVs and truth.csv into `dir` (created if needed).
inline void write_bundle(const SynthBundle& b, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cannot create directory " + dir.string());
    using csv::escape;
    using csv::format_double;

    {
        auto out = detail::open_output(dir / "units.csv");
        detail::write_header(out, units_header());
        for (const auto& u : b.units)
            out << escape(u.unit_id) << ',' << level_name(u.level) << ',' << escape(u.state) << ','
                << escape(u.county_id) << ',' << ecoregion_name(u.ecoregion) << ',' << format_double(u.elevation_m)
                << '\n';
    }
    {
        auto out = detail::open_output(dir / "observations.csv");
        detail::write_header(out, observations_header());
        for (const auto& s : b.observations)
            for (const auto& smp : s.samples)
                out << escape(s.unit_id) << ',' << band_name(s.band) << ',' << format_date(smp.date) << ','
                    << format_double(smp.value) << '\n';
    }
    {
        auto out = detail::open_output(dir / "climate.csv");
        detail::write_header(out, climate_header());
        for (const auto& c : b.climate)
            out << escape(c.unit_id) << ',' << format_date(c.date) << ',' << format_double(c.tmin_c) << ','
                << format_double(c.tmax_c) << ',' << format_double(c.ppt_mm) << '\n';
    }
    {
        auto out = detail::open_output(dir / "embeddings.csv");
        detail::write_header(out, embeddings_header());
        for (const auto& e : b.embeddings) {
            out << escape(e.unit_id) << ',' << e.year;
            for (double v : e.values) out << ',' << format_double(v);
            out << '\n';
        }
    }
    {
        auto out = detail::open_output(dir / "labels.csv");
        detail::write_header(out, labels_header());
        for (const auto& l : b.labels)
            out << escape(l.unit_id) << ',' << l.year << ',' << task_name(l.task) << ',' << format_double(l.value)
                << '\n';
    }
    {
        auto out = detail::open_output(dir / "truth.csv");
        detail::write_header(out, truth_header());
        for (const auto& t : b.truth)
            out << t.kind << ',' << escape(t.unit_id) << ',' << t.year << ',' << escape(t.name) << ','
                << format_double(t.value) << '\n';
    }
}

inline SynthBundle generate(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& dir,
                            unsigned threads = 1) {
    auto bundle = generate_bundle(spec, seed, threads);
    write_bundle(bundle, dir);
    return bundle;
}

inline std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
    csv::Reader r(path.string(), path.filename().string());
    r.expect_header(truth_header());
    std::vector<TruthRecord> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 5);
        TruthRecord t{f[0], f[1], static_cast<int>(r.integer(f, 3)), f[3], 0.0};
        t.value = f[4] == "NA" ? std::numeric_limits<double>::quiet_NaN() : r.real(f, 5);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace agbench
