#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "agbench/core/csv.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = 0;
    std::string output;
};

Result run(const fs::path& dir, const std::string& args) {
    const auto log = dir / "cli.log";
    const std::string cmd = "cd '" + dir.string() + "' && '" AGBENCH_BIN "' " + args + " > '" + log.string() + "' 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, testutil::read_file(log)};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, BenchmarkOnSynthBundleHasFiveSeedsPerFold) {
    const auto dir = testutil::fresh_dir("cli_bench");
    ASSERT_EQ(run(dir, "synth --bundle b --seed 3 --set synth.n_counties=20").status, 0);
    const auto r = run(dir, "benchmark --bundle b --out o --set model.n_trees=10");
    ASSERT_EQ(r.status, 0) << r.output;
    std::map<std::string, std::size_t> seeds_per_fold;
    const auto rows = lines(testutil::read_file(dir / "o" / "report.csv"));
    ASSERT_EQ(rows.front(), "task,crop,feature_set,model,scheme,fold,seed,metric,value");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = agbench::csv::split_record(rows[i]);
        if (f[6] != "mean" && f[7] == "R2") ++seeds_per_fold[f[5]];
    }
    ASSERT_EQ(seeds_per_fold.size(), 5u);
    for (const auto& [fold, n] : seeds_per_fold) EXPECT_EQ(n, 5u) << fold;
    EXPECT_TRUE(fs::exists(dir / "o" / "report.json"));
    const auto sidecar = testutil::read_file(dir / "o" / "report.config.txt");
    EXPECT_NE(sidecar.find("model.n_trees=10"), std::string::npos) << sidecar;

    const auto rep = run(dir, "report o/report.csv --out o");
    ASSERT_EQ(rep.status, 0) << rep.output;
    EXPECT_NE(rep.output.find("yield / corn / RF / group_cv"), std::string::npos) << rep.output;
    EXPECT_TRUE(fs::exists(dir / "o" / "summary.txt"));
}

TEST(Cli, FeaturizeTillageHas67FeatureColumns) {
    const auto dir = testutil::fresh_dir("cli_feat");
    ASSERT_EQ(run(dir, "synth --task tillage --bundle b --set synth.n_counties=6").status, 0);
    const auto r = run(dir, "featurize --task tillage --bundle b --out o");
    ASSERT_EQ(r.status, 0) << r.output;
    const auto rows = lines(testutil::read_file(dir / "o" / "features.csv"));
    const auto header = agbench::csv::split_record(rows.front());
    ASSERT_GE(header.size(), 3u);
    EXPECT_EQ(header[0], "unit_id");
    EXPECT_EQ(header.size() - 3, 67u);
}

TEST(Cli, TrainWritesModelAndImportance) {
    const auto dir = testutil::fresh_dir("cli_train");
    ASSERT_EQ(run(dir, "synth --bundle b --set synth.n_counties=8").status, 0);
    const auto r = run(dir, "train --bundle b --out o --set model.kind=GBT --set model.n_trees=5");
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "o" / "model.txt"));
    const auto imp = lines(testutil::read_file(dir / "o" / "importance.csv"));
    EXPECT_EQ(imp.front(), "rank,feature,importance");
    EXPECT_EQ(imp.size(), 91u);
}

TEST(Cli, UnknownKeyFailsNamingIt) {
    const auto dir = testutil::fresh_dir("cli_unknown");
    testutil::write_file(dir / "run.cfg", "# comment\nmodel.kind=RF\nmodel.nope=3\n");
    const auto r = run(dir, "benchmark -c run.cfg");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("model.nope"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("run.cfg:3"), std::string::npos) << r.output;
    EXPECT_EQ(lines(r.output).size(), 1u) << r.output;

    const auto s = run(dir, "synth --set bogus=1");
    EXPECT_NE(s.status, 0);
    EXPECT_NE(s.output.find("bogus"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const auto dir = testutil::fresh_dir("cli_override");
    testutil::write_file(dir / "run.cfg", "synth.n_counties=3\nbase_seed=4\n");
    ASSERT_EQ(run(dir, "synth -c run.cfg --set synth.n_counties=5 --bundle b").status, 0);
    const auto units = lines(testutil::read_file(dir / "b" / "units.csv"));
    EXPECT_EQ(units.size(), 6u);
    const auto sidecar = testutil::read_file(dir / "b" / "synth.config.txt");
    EXPECT_NE(sidecar.find("synth.n_counties=5"), std::string::npos) << sidecar;
    EXPECT_NE(sidecar.find("base_seed=4"), std::string::npos) << sidecar;
}

TEST(Cli, PipelineErrorsCarryStage) {
    const auto dir = testutil::fresh_dir("cli_stage");
    const auto r = run(dir, "benchmark --bundle missing");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.output.rfind("agbench: error: ", 0), 0u) << r.output;
}

TEST(Cli, ShippedConfigsRun) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(AGBENCH_CONFIGS)) {
        if (entry.path().extension() != ".cfg") continue;
        ++n;
        const auto dir = testutil::fresh_dir("cli_cfg_" + entry.path().stem().string());
        const std::string cfg = "-c '" + entry.path().string() + "'";
        const auto s = run(dir, "synth " + cfg + " --bundle b --set synth.n_counties=12");
        ASSERT_EQ(s.status, 0) << entry.path() << s.output;
        const auto r = run(dir, "benchmark " + cfg + " --bundle b --out o --set model.n_trees=5 --set n_repeats=1");
        ASSERT_EQ(r.status, 0) << entry.path() << r.output;
        EXPECT_TRUE(fs::exists(dir / "o" / "report.csv"));
    }
    EXPECT_GE(n, 3u);
}
