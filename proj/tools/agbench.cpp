// agbench command-line entry point.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "agbench/agbench.hpp"

namespace fs = std::filesystem;
using namespace agbench;

namespace {

struct StageError {
    std::string stage;
    std::string message;
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError{name, e.what()};
    }
}

struct Options {
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::string task, bundle, out, seed, threads;
    std::vector<std::string> reports;
};

ConfigValues collect(const Options& o) {
    ConfigValues v;
    for (const auto& c : o.configs) v.parse_file(c);
    for (const auto& s : o.sets) v.override_with(s);
    auto flag = [&](const std::string& key, const std::string& value) {
        if (!value.empty()) v.set(key, value, "--" + key);
    };
    flag("task.name", o.task);
    flag("bundle", o.bundle);
    flag("out", o.out);
    flag("base_seed", o.seed);
    flag("threads", o.threads);
    return v;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

fs::path prepare_out(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec || !fs::is_directory(cfg.out)) throw Error("cannot create output directory " + cfg.out);
    return fs::path(cfg.out);
}

void write_sidecar(const fs::path& p, const ConfigValues& values, const std::string& command) {
    open_out(p) << config_sidecar(values, command);
}

void say(const std::string& line) { std::cout << "agbench: " << line << '\n'; }

int run_synth(const ConfigValues& values) {
    const RunConfig cfg = stage("config", [&] { return values.resolve(); });
    const fs::path dir = cfg.bundle;
    const auto bundle = stage("synth", [&] {
        return generate(cfg.synth, cfg.bench.base_seed, dir, resolve_threads(cfg.threads));
    });
    stage("io", [&] { write_sidecar(dir / "synth.config.txt", values, "synth"); });
    say("wrote bundle " + dir.string() + " (" + std::to_string(bundle.units.size()) + " units, " +
        std::to_string(bundle.labels.size()) + " labels)");
    return 0;
}

Dataset load(const RunConfig& cfg) {
    return stage("load", [&] { return load_dataset(cfg.bundle); });
}

int run_featurize(const ConfigValues& values) {
    const RunConfig cfg = stage("config", [&] { return values.resolve(); });
    const Dataset ds = load(cfg);
    const auto table = stage("featurize", [&] { return assemble_table(ds, cfg.task, resolve_threads(cfg.threads)); });
    const fs::path out = stage("io", [&] { return prepare_out(cfg); });
    stage("io", [&] {
        auto f = open_out(out / "features.csv");
        write_feature_csv(table, f);
        write_sidecar(out / "features.config.txt", values, "featurize");
    });
    say("wrote " + (out / "features.csv").string() + " (" + std::to_string(table.rows()) + " rows, " +
        std::to_string(table.cols()) + " features)");
    for (const auto& [cause, n] : table.log().excluded) say("excluded " + std::to_string(n) + " rows: " + cause);
    for (const auto& [cause, n] : table.log().imputed) say("imputed " + std::to_string(n) + " rows: " + cause);
    return 0;
}

int run_train(const ConfigValues& values) {
    const RunConfig cfg = stage("config", [&] { return values.resolve(); });
    const Dataset ds = load(cfg);
    const unsigned threads = resolve_threads(cfg.threads);
    const auto table = stage("featurize", [&] { return assemble_table(ds, cfg.task, threads); });
    ModelSpec spec = cfg.model;
    spec.seed = derive_seed(cfg.bench.base_seed, 0);
    const auto model = stage("train", [&] { return train(spec, table, {threads}); });
    const fs::path out = stage("io", [&] { return prepare_out(cfg); });
    stage("io", [&] {
        auto m = open_out(out / "model.txt");
        save_model(model, m);
        auto f = open_out(out / "importance.csv");
        f << "rank,feature,importance\n";
        std::size_t rank = 1;
        for (const auto& imp : top_features(model, model.feature_names.size()))
            f << rank++ << ',' << csv::escape(imp.feature) << ',' << csv::format_double(imp.importance) << '\n';
        write_sidecar(out / "train.config.txt", values, "train");
    });
    say("wrote " + (out / "model.txt").string() + " and " + (out / "importance.csv").string());
    return 0;
}

int run_benchmark_cmd(const ConfigValues& values) {
    RunConfig cfg = stage("config", [&] { return values.resolve(); });
    const Dataset ds = load(cfg);
    cfg.bench.threads = resolve_threads(cfg.threads);
    const auto report =
        stage("benchmark", [&] { return run_benchmark(ds, cfg.task, cfg.model, cfg.scheme, cfg.bench); });
    const fs::path out = stage("io", [&] { return prepare_out(cfg); });
    stage("io", [&] {
        auto csv_out = open_out(out / "report.csv");
        write_report_csv(report, csv_out);
        auto json = report_json(report);
        json["config_hash"] = values.effective_hash();
        open_out(out / "report.json") << json.dump(2) << '\n';
        write_sidecar(out / "report.config.txt", values, "benchmark");
    });
    auto count = [](std::size_t n, const std::string& noun) {
        return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
    };
    say("wrote " + (out / "report.csv").string() + " (" + std::to_string(report.context.rows) + " rows, " +
        count(report.fold_labels.size(), "fold") + " x " + count(report.seeds.size(), "seed") + ")");
    return 0;
}

int run_report(const ConfigValues& values, const std::vector<std::string>& files) {
    const RunConfig cfg = stage("config", [&] { return values.resolve(); });
    std::vector<std::string> inputs = files;
    if (inputs.empty()) inputs.push_back((fs::path(cfg.out) / "report.csv").string());
    std::vector<ReportRow> rows;
    stage("report", [&] {
        for (const auto& f : inputs) {
            auto r = read_report_csv(f);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    });
    const std::string text = render_summary(rows);
    std::cout << text;
    stage("io", [&] {
        const fs::path out = prepare_out(cfg);
        open_out(out / "summary.txt") << text;
    });
    return 0;
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agbench: agricultural benchmark toolkit"};
    app.require_subcommand(1);
    Options opts;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opts.configs, "config file (key=value lines)");
        sub->add_option("--set", opts.sets, "override, key=value (repeatable)");
        sub->add_option("--task", opts.task, "task.name shorthand (tillage, covercrop accepted)");
        sub->add_option("--bundle", opts.bundle, "bundle directory");
        sub->add_option("--out", opts.out, "output directory");
        sub->add_option("--seed", opts.seed, "base_seed");
        sub->add_option("--threads", opts.threads, "worker threads (auto = all cores)");
    };
    auto* synth = app.add_subcommand("synth", "generate a synthetic bundle");
    auto* featurize = app.add_subcommand("featurize", "write the feature table");
    auto* trainer = app.add_subcommand("train", "train a model on all rows");
    auto* bench = app.add_subcommand("benchmark", "run the repeated-seed evaluation");
    auto* report = app.add_subcommand("report", "summarize report files");
    for (auto* s : {synth, featurize, trainer, bench, report}) common(s);
    report->add_option("reports", opts.reports, "report CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "agbench: error: usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        const ConfigValues values = stage("config", [&] { return collect(opts); });
        if (*synth) return run_synth(values);
        if (*featurize) return run_featurize(values);
        if (*trainer) return run_train(values);
        if (*bench) return run_benchmark_cmd(values);
        return run_report(values, opts.reports);
    } catch (const StageError& e) {
        std::cerr << "agbench: error: " << e.stage << ": " << one_line(e.message) << '\n';
        return e.stage == "config" ? 2 : 1;
    }
}
