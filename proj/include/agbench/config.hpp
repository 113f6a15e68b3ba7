#pragma once

// Flat key=value run configuration with dotted sections (model.kind=RF).
// Every key has a default; unknown keys are rejected with their line.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "agbench/core/error.hpp"
#include "agbench/core/rng.hpp"
#include "agbench/evaluate.hpp"
#include "agbench/featurize.hpp"
#include "agbench/models.hpp"
#include "agbench/synth.hpp"

namespace agbench {

struct RunConfig {
    std::string bundle = "bundle";
    std::string out = "out";
    TaskConfig task;
    ModelSpec model;
    SchemeParams scheme;
    BenchmarkOptions bench;
    SynthSpec synth;
    unsigned threads = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

template <class T>
T parse_number(const std::string& s) {
    T v{};
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw std::invalid_argument("'" + s + "' is not a valid number");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v)) throw std::invalid_argument("'" + s + "' is not finite");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw std::invalid_argument("'" + s + "' is not a boolean");
}

/// "MM-DD"
inline std::pair<unsigned, unsigned> parse_month_day(const std::string& s) {
    if (s.size() != 5 || s[2] != '-') throw std::invalid_argument("'" + s + "' is not MM-DD");
    const auto m = parse_number<unsigned>(s.substr(0, 2));
    const auto d = parse_number<unsigned>(s.substr(3, 2));
    (void)make_date(2000, m, d);  // validates
    return {m, d};
}

template <class E, class F>
E parse_enum(const std::string& s, F parse, const char* what) {
    if (auto v = parse(s)) return *v;
    throw std::invalid_argument("unknown " + std::string(what) + " '" + s + "'");
}

inline Task parse_task_alias(const std::string& s) {
    if (s == "tillage") return Task::tillage_class;
    if (s == "covercrop") return Task::covercrop_class;
    return parse_enum<Task>(s, parse_task, "task");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct KeySpec {
    std::string default_value;
    Setter set;
    bool hashed = true;  // false: does not affect results
};

inline SeasonSpec& season_of(RunConfig& c) {
    if (!c.task.season) c.task.season = default_season(c.task.task, c.task.crop);
    return *c.task.season;
}

inline GddThresholds& gdd_of(RunConfig& c) {
    if (!c.task.gdd) c.task.gdd = default_gdd_thresholds(c.task.crop);
    return *c.task.gdd;
}

}  // namespace detail

/**
 * Every accepted key. An empty default means "derived" (season and GDD
 * thresholds follow the task and crop; max depth and max features follow the
 * model kind).
 */
inline const std::map<std::string, detail::KeySpec>& config_keys() {
    using namespace detail;
    static const std::map<std::string, KeySpec> keys{
        {"bundle", {"bundle", [](RunConfig& c, const std::string& v) { c.bundle = v; }, false}},
        {"out", {"out", [](RunConfig& c, const std::string& v) { c.out = v; }, false}},
        {"threads",
         {"auto",
          [](RunConfig& c, const std::string& v) { c.threads = v == "auto" ? 0u : parse_number<unsigned>(v); },
          false}},
        {"base_seed", {"0", [](RunConfig& c, const std::string& v) { c.bench.base_seed = parse_number<std::uint64_t>(v); }}},
        {"n_repeats", {"5", [](RunConfig& c, const std::string& v) { c.bench.n_repeats = parse_number<std::size_t>(v); }}},

        {"task.name", {"yield", [](RunConfig& c, const std::string& v) { c.task.task = parse_task_alias(v); }}},
        {"task.crop",
         {"corn", [](RunConfig& c, const std::string& v) { c.task.crop = parse_enum<Crop>(v, parse_crop, "crop"); }}},
        {"task.feature_set",
         {"RS",
          [](RunConfig& c, const std::string& v) {
              if (v == "RS") c.task.feature_set = FeatureSet::RS;
              else if (v == "AEF") c.task.feature_set = FeatureSet::AEF;
              else throw std::invalid_argument("feature_set must be RS or AEF");
          }}},
        {"task.missing_policy",
         {"drop",
          [](RunConfig& c, const std::string& v) {
              if (v == "drop") c.task.missing_policy = MissingPolicy::drop;
              else if (v == "impute_mean") c.task.missing_policy = MissingPolicy::impute_mean;
              else throw std::invalid_argument("missing_policy must be drop or impute_mean");
          }}},
        {"task.season.start_year_offset",
         {"", [](RunConfig& c, const std::string& v) { season_of(c).start_year_offset = parse_number<int>(v); }}},
        {"task.season.start",
         {"",
          [](RunConfig& c, const std::string& v) {
              auto [m, d] = parse_month_day(v);
              season_of(c).start_month = m;
              season_of(c).start_day = d;
          }}},
        {"task.season.end",
         {"",
          [](RunConfig& c, const std::string& v) {
              auto [m, d] = parse_month_day(v);
              season_of(c).end_month = m;
              season_of(c).end_day = d;
          }}},
        {"task.gdd.base", {"", [](RunConfig& c, const std::string& v) { gdd_of(c).t_base = parse_number<double>(v); }}},
        {"task.gdd.cap", {"", [](RunConfig& c, const std::string& v) { gdd_of(c).t_cap = parse_number<double>(v); }}},
        {"task.gcvi_minus_one",
         {"false", [](RunConfig& c, const std::string& v) { c.task.gcvi_minus_one = parse_bool(v); }}},
        {"task.gdd_per_day", {"false", [](RunConfig& c, const std::string& v) { c.task.gdd_per_day = parse_bool(v); }}},
        {"task.min_climate_coverage",
         {"0.8", [](RunConfig& c, const std::string& v) { c.task.min_climate_coverage = parse_number<double>(v); }}},

        {"model.kind",
         {"RF",
          [](RunConfig& c, const std::string& v) {
              if (v == "RF") c.model.kind = ModelKind::RF;
              else if (v == "GBT") c.model.kind = ModelKind::GBT;
              else throw std::invalid_argument("model.kind must be RF or GBT");
          }}},
        {"model.n_trees", {"200", [](RunConfig& c, const std::string& v) { c.model.n_trees = parse_number<std::size_t>(v); }}},
        {"model.max_depth",
         {"",
          [](RunConfig& c, const std::string& v) {
              if (v == "none") c.model.max_depth = SIZE_MAX;
              else c.model.max_depth = parse_number<std::size_t>(v);
          }}},
        {"model.learning_rate",
         {"0.1", [](RunConfig& c, const std::string& v) { c.model.learning_rate = parse_number<double>(v); }}},
        {"model.max_features",
         {"",
          [](RunConfig& c, const std::string& v) {
              if (v == "all") c.model.max_features = MaxFeatures::all;
              else if (v == "sqrt") c.model.max_features = MaxFeatures::sqrt;
              else throw std::invalid_argument("max_features must be all or sqrt");
          }}},
        {"model.min_samples_leaf",
         {"1", [](RunConfig& c, const std::string& v) { c.model.min_samples_leaf = parse_number<std::size_t>(v); }}},

        {"scheme.name",
         {"group_cv",
          [](RunConfig& c, const std::string& v) { c.scheme.scheme = parse_enum<Scheme>(v, parse_scheme, "scheme"); }}},
        {"scheme.k", {"5", [](RunConfig& c, const std::string& v) { c.scheme.k = parse_number<std::size_t>(v); }}},
        {"scheme.group_by",
         {"auto",
          [](RunConfig& c, const std::string& v) {
              if (v == "auto") c.scheme.group_by = GroupBy::automatic;
              else if (v == "state") c.scheme.group_by = GroupBy::state;
              else if (v == "county") c.scheme.group_by = GroupBy::county;
              else throw std::invalid_argument("group_by must be auto, state or county");
          }}},
        {"scheme.direction",
         {"East->West",
          [](RunConfig& c, const std::string& v) {
              if (v == "East->West") c.scheme.direction = Direction::east_to_west;
              else if (v == "West->East") c.scheme.direction = Direction::west_to_east;
              else throw std::invalid_argument("direction must be East->West or West->East");
          }}},

        {"synth.n_counties",
         {"24", [](RunConfig& c, const std::string& v) { c.synth.n_counties = parse_number<std::size_t>(v); }}},
        {"synth.fields_per_county",
         {"0", [](RunConfig& c, const std::string& v) { c.synth.fields_per_county = parse_number<std::size_t>(v); }}},
        {"synth.states",
         {"IL,IA,IN,KS,MI,MN,OH,MO,WI,ND,NE,SD",
          [](RunConfig& c, const std::string& v) { c.synth.states = split_list(v); }}},
        {"synth.years",
         {"2019,2020,2021,2022",
          [](RunConfig& c, const std::string& v) {
              c.synth.years.clear();
              for (const auto& y : split_list(v)) c.synth.years.push_back(parse_number<int>(y));
          }}},
        {"synth.revisit_min_days",
         {"8", [](RunConfig& c, const std::string& v) { c.synth.revisit_min_days = parse_number<double>(v); }}},
        {"synth.revisit_max_days",
         {"16", [](RunConfig& c, const std::string& v) { c.synth.revisit_max_days = parse_number<double>(v); }}},
        {"synth.dropout", {"0.1", [](RunConfig& c, const std::string& v) { c.synth.dropout = parse_number<double>(v); }}},
        {"synth.gap_rate", {"0", [](RunConfig& c, const std::string& v) { c.synth.gap_rate = parse_number<double>(v); }}},
        {"synth.obs_sigma", {"0", [](RunConfig& c, const std::string& v) { c.synth.obs_sigma = parse_number<double>(v); }}},
        {"synth.field_spread",
         {"0.5", [](RunConfig& c, const std::string& v) { c.synth.field_spread = parse_number<double>(v); }}},
        {"synth.label_terms",
         {"",
          [](RunConfig& c, const std::string& v) {
              c.synth.label_terms.clear();
              for (const auto& term : split_list(v)) {
                  const auto colon = term.rfind(':');
                  if (colon == std::string::npos) c.synth.label_terms.push_back({term, 1.0});
                  else
                      c.synth.label_terms.push_back(
                          {trim(term.substr(0, colon)), parse_number<double>(trim(term.substr(colon + 1)))});
              }
          }}},
        {"synth.label_intercept",
         {"0", [](RunConfig& c, const std::string& v) { c.synth.label_intercept = parse_number<double>(v); }}},
        {"synth.label_sigma",
         {"",
          [](RunConfig& c, const std::string& v) { c.synth.label_sigma = parse_number<double>(v); }}},
        {"synth.r2_ceiling",
         {"0.9", [](RunConfig& c, const std::string& v) { c.synth.r2_ceiling = parse_number<double>(v); }}},
        {"synth.embedding_sigma",
         {"0.05", [](RunConfig& c, const std::string& v) { c.synth.embedding_sigma = parse_number<double>(v); }}},
        {"synth.region_offset",
         {"0", [](RunConfig& c, const std::string& v) { c.synth.region_offset = parse_number<double>(v); }}},
    };
    return keys;
}

/// Key values with where each one came from ("file:line" or "--set").
class ConfigValues {
public:
    struct Entry {
        std::string value;
        std::string origin;
    };

    void set(const std::string& key, const std::string& value, const std::string& origin) {
        if (!config_keys().count(key)) throw ConfigError(origin + ": unknown config key '" + key + "'");
        entries_[key] = {value, origin};
    }

    /// Parses `key=value` lines; `#` starts a comment. Later files and overrides win.
    void parse(std::istream& in, const std::string& source) {
        std::string line;
        std::size_t n = 0;
        std::map<std::string, std::size_t> seen;
        while (std::getline(in, line)) {
            ++n;
            const auto hash = line.find('#');
            const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (body.empty()) continue;
            const std::string where = source + ":" + std::to_string(n);
            const auto eq = body.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + body + "'");
            const std::string key = detail::trim(body.substr(0, eq));
            if (key.empty()) throw ConfigError(where + ": empty key");
            if (auto it = seen.find(key); it != seen.end())
                throw ConfigError(where + ": key '" + key + "' already set on line " + std::to_string(it->second));
            seen[key] = n;
            set(key, detail::trim(body.substr(eq + 1)), where);
        }
    }

    void parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file " + path);
        parse(in, path);
    }

    /// "key=value" from the command line.
    void override_with(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + assignment + "'");
        set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)), "--set");
    }

    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    /// Defaults, then every explicit value; errors name the key and its origin.
    RunConfig resolve() const {
        RunConfig c;
        // Task and crop first: derived season and thresholds depend on them.
        const std::vector<std::string> first{"task.name", "task.crop"};
        auto apply = [&](const std::string& key, const Entry& e) {
            try {
                config_keys().at(key).set(c, e.value);
            } catch (const std::exception& ex) {
                throw ConfigError(e.origin + ": key '" + key + "': " + ex.what());
            }
        };
        for (const auto& k : first)
            if (auto it = entries_.find(k); it != entries_.end()) apply(k, it->second);
        for (const auto& [k, e] : entries_)
            if (std::find(first.begin(), first.end(), k) == first.end()) apply(k, e);
        try {
            c.task.validate();
            c.model.validate();
        } catch (const std::exception& ex) {
            throw ConfigError(ex.what());
        }
        c.synth.task = c.task.task;
        c.synth.crop = c.task.crop;
        c.model.task = model_task_for(c.task.task);
        return c;
    }

    /**
     * The effective configuration, one key=value per line, keys sorted.
     * Keys that do not affect results (paths, threads) are left out, so the
     * text and its hash depend only on what determines the outputs.
     */
    std::string effective_text() const {
        std::ostringstream o;
        for (const auto& [k, spec] : config_keys()) {
            if (!spec.hashed) continue;
            auto it = entries_.find(k);
            const std::string v = it != entries_.end() ? it->second.value : spec.default_value;
            o << k << '=' << (v.empty() && it == entries_.end() ? "<derived>" : v) << '\n';
        }
        return o.str();
    }

    std::string effective_hash() const { return hex64(fnv1a64(effective_text())); }

private:
    std::map<std::string, Entry> entries_;
};

/// Sidecar text echoing the effective config and its hash.
inline std::string config_sidecar(const ConfigValues& values, const std::string& command) {
    std::ostringstream o;
    o << "# agbench " << command << " effective config\n# config_hash=" << values.effective_hash() << '\n'
      << values.effective_text();
    return o.str();
}

}  // namespace agbench
