#pragma once

// Leakage-aware split plans, regression/classification metrics and the
// repeated-seed benchmark protocol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agbench/core/csv.hpp"
#include "agbench/core/error.hpp"
#include "agbench/core/parallel.hpp"
#include "agbench/core/rng.hpp"
#include "agbench/dataset.hpp"
#include "agbench/featurize.hpp"
#include "agbench/models.hpp"

namespace agbench {

enum class Scheme : std::uint8_t { group_cv, yearly_cv, scale_transfer, space_transfer };
enum class GroupBy : std::uint8_t { automatic, state, county };
enum class Direction : std::uint8_t { east_to_west, west_to_east };

constexpr std::string_view scheme_name(Scheme s) noexcept {
    switch (s) {
        case Scheme::group_cv: return "group_cv";
        case Scheme::yearly_cv: return "yearly_cv";
        case Scheme::scale_transfer: return "scale_transfer";
        default: return "space_transfer";
    }
}

inline std::optional<Scheme> parse_scheme(std::string_view s) noexcept {
    for (Scheme v : {Scheme::group_cv, Scheme::yearly_cv, Scheme::scale_transfer, Scheme::space_transfer})
        if (scheme_name(v) == s) return v;
    return std::nullopt;
}

constexpr std::string_view group_by_name(GroupBy g) noexcept {
    switch (g) {
        case GroupBy::state: return "state";
        case GroupBy::county: return "county";
        default: return "auto";
    }
}

constexpr std::string_view direction_name(Direction d) noexcept {
    return d == Direction::east_to_west ? "East->West" : "West->East";
}

struct SchemeParams {
    Scheme scheme = Scheme::group_cv;
    std::size_t k = 5;                       // group_cv folds
    GroupBy group_by = GroupBy::automatic;   // county rows: state-year; field rows: county-year
    Direction direction = Direction::east_to_west;

    std::string canonical() const {
        std::ostringstream o;
        o << "scheme.name=" << scheme_name(scheme) << "\nscheme.k=" << k << "\nscheme.group_by="
          << group_by_name(group_by) << "\nscheme.direction=" << direction_name(direction) << '\n';
        return o.str();
    }
};

/// What the split planner needs to know about one table row.
struct SplitRow {
    std::string unit_id;
    int year = 0;
    UnitLevel level = UnitLevel::county;
    std::string state;
    std::string county_id;
    Ecoregion ecoregion = Ecoregion::Other;
};

inline std::vector<SplitRow> split_rows(const FeatureTable& table, const Dataset& ds) {
    std::vector<SplitRow> out;
    out.reserve(table.rows());
    for (const auto& key : table.keys()) {
        const UnitMeta* u = ds.find_unit(key.unit_id);
        if (!u) throw Error("table row for unknown unit " + key.unit_id);
        out.push_back({key.unit_id, key.year, u->level, u->state, u->county_id, u->ecoregion});
    }
    return out;
}

/// Spatio-temporal group of a row: "<state>|<year>" or "<county>|<year>".
inline std::string group_id(const SplitRow& row, GroupBy by) {
    const bool by_state = by == GroupBy::state || (by == GroupBy::automatic && row.level == UnitLevel::county);
    return (by_state ? "state:" + row.state : "county:" + row.county_id) + "|" + std::to_string(row.year);
}

struct Fold {
    std::string label;
    std::vector<std::size_t> train;  // ascending row indices
    std::vector<std::size_t> test;
};

struct SplitPlan {
    Scheme scheme = Scheme::group_cv;
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
    std::string group_key;
};

/**
 * Realizes one evaluation scheme over `rows`.
 *  - group_cv: groups shuffled with `seed`, dealt round-robin into k folds.
 *  - yearly_cv: leave-one-year-out, folds in ascending year order.
 *  - scale_transfer: county rows train, field rows test.
 *  - space_transfer: source-region rows train, target-region rows test;
 *    rows in neither region are left out.
 */
inline SplitPlan build_split_plan(std::span<const SplitRow> rows, const SchemeParams& params, std::uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("build_split_plan: no rows");
    SplitPlan plan;
    plan.scheme = params.scheme;
    plan.seed = seed;

    auto complement = [&](const std::vector<std::size_t>& test) {
        std::vector<std::size_t> train;
        std::size_t j = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (j < test.size() && test[j] == i) ++j;
            else train.push_back(i);
        }
        return train;
    };

    switch (params.scheme) {
        case Scheme::group_cv: {
            if (params.k < 2) throw std::invalid_argument("group_cv needs k >= 2");
            plan.group_key = params.group_by == GroupBy::automatic ? "state|year (county rows), county|year (field rows)"
                                                                   : std::string(group_by_name(params.group_by)) + "|year";
            std::map<std::string, std::vector<std::size_t>> groups;
            for (std::size_t i = 0; i < rows.size(); ++i) groups[group_id(rows[i], params.group_by)].push_back(i);
            if (groups.size() < params.k)
                throw std::invalid_argument("group_cv: " + std::to_string(groups.size()) + " groups, fewer than k = " +
                                            std::to_string(params.k));
            std::vector<const std::vector<std::size_t>*> order;
            for (const auto& [id, members] : groups) order.push_back(&members);
            Rng rng(seed);
            rng.shuffle(std::span(order));
            std::vector<std::vector<std::size_t>> tests(params.k);
            for (std::size_t g = 0; g < order.size(); ++g)
                tests[g % params.k].insert(tests[g % params.k].end(), order[g]->begin(), order[g]->end());
            for (std::size_t f = 0; f < params.k; ++f) {
                std::sort(tests[f].begin(), tests[f].end());
                plan.folds.push_back({std::to_string(f), complement(tests[f]), std::move(tests[f])});
            }
            break;
        }
        case Scheme::yearly_cv: {
            plan.group_key = "year";
            std::map<int, std::vector<std::size_t>> years;
            for (std::size_t i = 0; i < rows.size(); ++i) years[rows[i].year].push_back(i);
            if (years.size() < 2) throw std::invalid_argument("yearly_cv needs at least two distinct years");
            for (auto& [year, test] : years) plan.folds.push_back({std::to_string(year), complement(test), test});
            break;
        }
        case Scheme::scale_transfer: {
            plan.group_key = "level";
            Fold fold{"county->field", {}, {}};
            for (std::size_t i = 0; i < rows.size(); ++i)
                (rows[i].level == UnitLevel::county ? fold.train : fold.test).push_back(i);
            if (fold.train.empty() || fold.test.empty())
                throw std::invalid_argument("scale_transfer needs both county and field rows");
            plan.folds.push_back(std::move(fold));
            break;
        }
        case Scheme::space_transfer: {
            plan.group_key = "ecoregion";
            const Ecoregion source = params.direction == Direction::east_to_west ? Ecoregion::East : Ecoregion::West;
            const Ecoregion target = source == Ecoregion::East ? Ecoregion::West : Ecoregion::East;
            Fold fold{std::string(direction_name(params.direction)), {}, {}};
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].ecoregion == source) fold.train.push_back(i);
                else if (rows[i].ecoregion == target) fold.test.push_back(i);
            }
            if (fold.train.empty() || fold.test.empty())
                throw std::invalid_argument("space_transfer needs rows on both sides of " +
                                            std::string(direction_name(params.direction)));
            plan.folds.push_back(std::move(fold));
            break;
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Metrics

struct RegressionMetrics {
    std::optional<double> r2;  // undefined when the truth is constant
    double rmse = 0.0;
};

/// R² = 1 - SS_res / SS_tot (may be negative) and root mean squared error.
inline RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw std::invalid_argument("regression_metrics: need equal, nonzero lengths");
    const double n = static_cast<double>(truth.size());
    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    RegressionMetrics m;
    m.rmse = std::sqrt(ss_res / n);
    const bool constant = std::all_of(truth.begin(), truth.end(), [&](double t) { return t == truth[0]; });
    if (!constant) m.r2 = 1.0 - ss_res / ss_tot;
    return m;
}

struct ClassificationMetrics {
    double accuracy = 0.0;
    double f1_class0 = 0.0;
    double f1_class1 = 0.0;
    double f1_weighted = 0.0;
};

/**
 * Accuracy, per-class F1 (each class taken as the positive one in turn) and
 * F1 weighted by true class counts. 0/0 precision, recall or F1 count as 0.
 */
inline ClassificationMetrics classification_metrics(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw std::invalid_argument("classification_metrics: need equal, nonzero lengths");
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [truth][pred]
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if ((truth[i] != 0.0 && truth[i] != 1.0) || (pred[i] != 0.0 && pred[i] != 1.0))
            throw std::invalid_argument("classification_metrics: labels must be 0 or 1");
        ++confusion[truth[i] == 1.0][pred[i] == 1.0];
    }
    const double n = static_cast<double>(truth.size());
    auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
    auto f1 = [&](int c) {
        const double tp = static_cast<double>(confusion[c][c]);
        const double fp = static_cast<double>(confusion[1 - c][c]);
        const double fn = static_cast<double>(confusion[c][1 - c]);
        const double precision = ratio(tp, tp + fp);
        const double recall = ratio(tp, tp + fn);
        return ratio(2.0 * precision * recall, precision + recall);
    };
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / n;
    m.f1_class0 = f1(0);
    m.f1_class1 = f1(1);
    const double n0 = static_cast<double>(confusion[0][0] + confusion[0][1]);
    const double n1 = static_cast<double>(confusion[1][0] + confusion[1][1]);
    m.f1_weighted = n0 / n * m.f1_class0 + n1 / n * m.f1_class1;
    return m;
}

inline std::vector<std::string> metric_names(Task task) {
    if (is_classification(task)) return {"Accuracy", "F1_class0", "F1_class1", "F1_weighted"};
    if (task == Task::tillage_ratio) return {"R2", "RMSE", "RMSE_pct"};
    return {"R2", "RMSE"};
}

/// Metrics by name; an undefined R² is NaN.
inline std::map<std::string, double> compute_metrics(Task task, std::span<const double> truth,
                                                     std::span<const double> pred) {
    std::map<std::string, double> out;
    if (is_classification(task)) {
        const auto m = classification_metrics(truth, pred);
        out = {{"Accuracy", m.accuracy}, {"F1_class0", m.f1_class0}, {"F1_class1", m.f1_class1},
               {"F1_weighted", m.f1_weighted}};
    } else {
        const auto m = regression_metrics(truth, pred);
        out["R2"] = m.r2.value_or(std::numeric_limits<double>::quiet_NaN());
        out["RMSE"] = m.rmse;
        if (task == Task::tillage_ratio) out["RMSE_pct"] = 100.0 * m.rmse;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark

struct MetricEntry {
    std::string fold;
    std::string seed;  // derived seed in decimal, or "mean"
    std::string metric;
    double value = 0.0;
};

struct ReportContext {
    std::string task;
    std::string crop;
    std::string feature_set;
    std::string model;
    std::string scheme;
    std::string config_hash;
    std::size_t rows = 0;
    std::size_t n_repeats = 0;
    std::vector<std::string> flagged_defaults;
    BuildLog build_log;
};

inline constexpr std::string_view kPooledFold = "pooled";
inline constexpr std::string_view kAllFolds = "all";
inline constexpr std::string_view kMeanSeed = "mean";

struct MetricReport {
    ReportContext context;
    std::vector<std::string> fold_labels;
    std::vector<std::string> seeds;
    std::vector<MetricEntry> entries;     // one per (fold, seed, metric)
    std::vector<MetricEntry> aggregates;  // seed means per fold, then the fold mean ("all")

    std::optional<double> find(std::string_view fold, std::string_view seed, std::string_view metric) const {
        for (const auto* list : {&entries, &aggregates})
            for (const auto& e : *list)
                if (e.fold == fold && e.seed == seed && e.metric == metric) return e.value;
        return std::nullopt;
    }
};

struct BenchmarkOptions {
    std::size_t n_repeats = 5;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;  // does not change results
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline std::string benchmark_hash(const TaskConfig& cfg, const ModelSpec& spec, const SchemeParams& params,
                                  const BenchmarkOptions& opts) {
    std::ostringstream o;
    o << cfg.canonical() << spec.canonical() << params.canonical() << "n_repeats=" << opts.n_repeats
      << "\nbase_seed=" << opts.base_seed << '\n';
    return hex64(fnv1a64(o.str()));
}

}  // namespace detail

/**
 * Repeats the scheme `n_repeats` times with seeds hash(base_seed, i): build
 * the split plan, train on each fold's train rows, score its test rows. The
 * model seed of a fold is hash(repeat seed, fold index). Yearly CV also
 * scores the predictions pooled over all years.
 */
inline MetricReport run_benchmark(const FeatureTable& table, std::span<const SplitRow> rows, const TaskConfig& cfg,
                                  ModelSpec spec, const SchemeParams& params, const BenchmarkOptions& opts) {
    if (opts.n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
    if (table.rows() == 0) throw Error("benchmark: empty feature table");
    if (rows.size() != table.rows()) throw std::invalid_argument("benchmark: split rows do not match table");
    spec.task = model_task_for(cfg.task);
    spec.validate();

    MetricReport report;
    auto& ctx = report.context;
    ctx.task = task_name(cfg.task);
    ctx.crop = cfg.task == Task::yield ? std::string(crop_name(cfg.crop)) : "-";
    ctx.feature_set = feature_set_name(cfg.feature_set);
    ctx.model = model_kind_name(spec.kind);
    ctx.scheme = scheme_name(params.scheme);
    ctx.config_hash = detail::benchmark_hash(cfg, spec, params, opts);
    ctx.rows = table.rows();
    ctx.n_repeats = opts.n_repeats;
    ctx.flagged_defaults = cfg.flagged_defaults();
    ctx.flagged_defaults.push_back("model hyperparameters other than n_trees are toolkit defaults");
    if (params.scheme == Scheme::group_cv && params.k == 5) ctx.flagged_defaults.push_back("group_cv k = 5 assumed");
    ctx.build_log = table.log();

    std::vector<SplitPlan> plans;
    for (std::size_t i = 0; i < opts.n_repeats; ++i) {
        plans.push_back(build_split_plan(rows, params, derive_seed(opts.base_seed, i + 1)));
        report.seeds.push_back(std::to_string(plans.back().seed));
    }
    for (const auto& f : plans.front().folds) report.fold_labels.push_back(f.label);

    struct Job {
        std::size_t repeat, fold;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < plans.size(); ++r)
        for (std::size_t f = 0; f < plans[r].folds.size(); ++f) {
            if (plans[r].folds[f].test.empty())
                throw Error("benchmark: fold " + plans[r].folds[f].label + " has an empty test set");
            if (plans[r].folds[f].train.size() < 2)
                throw Error("benchmark: fold " + plans[r].folds[f].label + " has fewer than 2 training rows");
            jobs.push_back({r, f});
        }

    std::vector<std::vector<double>> predictions(jobs.size());
    parallel_for(jobs.size(), opts.threads, [&](std::size_t j) {
        const auto& plan = plans[jobs[j].repeat];
        const auto& fold = plan.folds[jobs[j].fold];
        ModelSpec fold_spec = spec;
        fold_spec.seed = derive_seed(plan.seed, jobs[j].fold);
        const auto train_table = table.select(fold.train);
        const auto test_table = table.select(fold.test);
        const auto model = train(fold_spec, train_table);
        predictions[j] = predict(model, test_table);
    });

    const auto names = metric_names(cfg.task);
    const std::size_t n_folds = report.fold_labels.size();
    // values[fold][metric][repeat]
    std::vector<std::map<std::string, std::vector<double>>> values(n_folds);
    std::map<std::string, std::vector<double>> pooled;
    std::vector<std::vector<double>> pooled_pred(plans.size(), std::vector<double>(table.rows(), 0.0));

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& plan = plans[jobs[j].repeat];
        const auto& fold = plan.folds[jobs[j].fold];
        std::vector<double> truth;
        for (std::size_t r : fold.test) truth.push_back(table.labels()[r]);
        const auto m = compute_metrics(cfg.task, truth, predictions[j]);
        for (const auto& name : names) {
            report.entries.push_back({fold.label, report.seeds[jobs[j].repeat], name, m.at(name)});
            values[jobs[j].fold][name].push_back(m.at(name));
        }
        for (std::size_t i = 0; i < fold.test.size(); ++i) pooled_pred[jobs[j].repeat][fold.test[i]] = predictions[j][i];
    }

    if (params.scheme == Scheme::yearly_cv) {
        for (std::size_t r = 0; r < plans.size(); ++r) {
            const auto m = compute_metrics(cfg.task, table.labels(), pooled_pred[r]);
            for (const auto& name : names) {
                report.entries.push_back({std::string(kPooledFold), report.seeds[r], name, m.at(name)});
                pooled[name].push_back(m.at(name));
            }
        }
    }

    for (std::size_t f = 0; f < n_folds; ++f)
        for (const auto& name : names)
            report.aggregates.push_back(
                {report.fold_labels[f], std::string(kMeanSeed), name, detail::mean_of(values[f][name])});
    if (params.scheme == Scheme::yearly_cv)
        for (const auto& name : names)
            report.aggregates.push_back(
                {std::string(kPooledFold), std::string(kMeanSeed), name, detail::mean_of(pooled[name])});
    for (const auto& name : names) {
        std::vector<double> fold_means;
        for (std::size_t f = 0; f < n_folds; ++f) fold_means.push_back(detail::mean_of(values[f][name]));
        report.aggregates.push_back({std::string(kAllFolds), std::string(kMeanSeed), name, detail::mean_of(fold_means)});
    }
    return report;
}

/// Assembles the feature table from `ds`, then benchmarks it.
inline MetricReport run_benchmark(const Dataset& ds, const TaskConfig& cfg, const ModelSpec& spec,
                                  const SchemeParams& params, const BenchmarkOptions& opts) {
    const auto table = assemble_table(ds, cfg, opts.threads);
    const auto rows = split_rows(table, ds);
    return run_benchmark(table, rows, cfg, spec, params, opts);
}

// ---------------------------------------------------------------------------
// Report files

inline const std::vector<std::string>& report_header() {
    static const std::vector<std::string> h{"task", "crop", "feature_set", "model", "scheme",
                                            "fold", "seed", "metric",      "value"};
    return h;
}

/// One row per (fold, seed, metric), then the aggregate rows.
inline void write_report_csv(const MetricReport& report, std::ostream& out) {
    const auto& h = report_header();
    for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
    out << '\n';
    const auto& c = report.context;
    for (const auto* list : {&report.entries, &report.aggregates})
        for (const auto& e : *list)
            out << c.task << ',' << c.crop << ',' << c.feature_set << ',' << c.model << ',' << c.scheme << ','
                << csv::escape(e.fold) << ',' << e.seed << ',' << e.metric << ',' << csv::format_double(e.value)
                << '\n';
}

inline nlohmann::ordered_json report_json(const MetricReport& report) {
    using nlohmann::ordered_json;
    const auto& c = report.context;
    ordered_json j;
    j["context"] = {{"task", c.task},       {"crop", c.crop},   {"feature_set", c.feature_set},
                    {"model", c.model},     {"scheme", c.scheme}, {"config_hash", c.config_hash},
                    {"rows", c.rows},       {"n_repeats", c.n_repeats}};
    j["flagged_defaults"] = c.flagged_defaults;
    j["build_log"] = {{"labeled_rows", c.build_log.labeled_rows},
                      {"excluded", c.build_log.excluded},
                      {"imputed", c.build_log.imputed}};
    j["seeds"] = report.seeds;
    auto value = [](double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); };
    ordered_json table = ordered_json::object();
    for (const auto& e : report.aggregates) table[e.fold][e.metric] = value(e.value);
    j["summary"] = table;
    ordered_json per_seed = ordered_json::object();
    for (const auto& e : report.entries) per_seed[e.fold][e.seed][e.metric] = value(e.value);
    j["per_seed"] = per_seed;
    return j;
}

struct ReportRow {
    std::string task, crop, feature_set, model, scheme, fold, seed, metric;
    double value = 0.0;
};

inline std::vector<ReportRow> read_report_csv(const std::string& path) {
    csv::Reader r(path, path);
    r.expect_header(report_header());
    std::vector<ReportRow> out;
    std::vector<std::string> f;
    while (r.next(f)) {
        r.expect_width(f, 9);
        ReportRow row{f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], 0.0};
        row.value = f[8] == "NA" ? std::numeric_limits<double>::quiet_NaN() : r.real(f, 9);
        out.push_back(std::move(row));
    }
    return out;
}

/**
 * Plain-text tables of the seed-mean rows: one block per (task, crop, model,
 * scheme), one line per fold and feature set, one column per metric.
 */
inline std::string render_summary(const std::vector<ReportRow>& rows) {
    struct Block {
        std::vector<std::string> metrics;
        std::vector<std::pair<std::string, std::string>> lines;  // (fold, feature_set)
        std::map<std::tuple<std::string, std::string, std::string>, double> cells;
    };
    std::map<std::string, Block> blocks;
    std::vector<std::string> block_order;
    for (const auto& r : rows) {
        if (r.seed != kMeanSeed) continue;
        const std::string key = r.task + " / " + r.crop + " / " + r.model + " / " + r.scheme;
        auto [it, fresh] = blocks.try_emplace(key);
        if (fresh) block_order.push_back(key);
        Block& b = it->second;
        if (std::find(b.metrics.begin(), b.metrics.end(), r.metric) == b.metrics.end()) b.metrics.push_back(r.metric);
        const auto line = std::make_pair(r.fold, r.feature_set);
        if (std::find(b.lines.begin(), b.lines.end(), line) == b.lines.end()) b.lines.push_back(line);
        b.cells[{r.fold, r.feature_set, r.metric}] = r.value;
    }
    std::ostringstream o;
    for (const auto& key : block_order) {
        const Block& b = blocks.at(key);
        o << key << '\n';
        o << std::left << std::setw(16) << "fold" << std::setw(8) << "set";
        for (const auto& m : b.metrics) o << std::right << std::setw(13) << m;
        o << '\n';
        for (const auto& [fold, fs] : b.lines) {
            o << std::left << std::setw(16) << fold << std::setw(8) << fs;
            for (const auto& m : b.metrics) {
                auto it = b.cells.find({fold, fs, m});
                std::ostringstream cell;
                if (it == b.cells.end() || std::isnan(it->second)) cell << "NA";
                else cell << std::fixed << std::setprecision(4) << it->second;
                o << std::right << std::setw(13) << cell.str();
            }
            o << '\n';
        }
        o << '\n';
    }
    return o.str();
}

}  // namespace agbench
