#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "agbench/synth.hpp"
#include "test_util.hpp"

using namespace agbench;
namespace fs = std::filesystem;

namespace {

using CoefKey = std::tuple<std::string, int, std::string>;

std::map<CoefKey, std::array<double, 5>> coefficients(const std::vector<TruthRecord>& truth) {
    static const std::map<std::string, std::size_t> slot{{"c", 0}, {"a1", 1}, {"b1", 2}, {"a2", 3}, {"b2", 4}};
    std::map<CoefKey, std::array<double, 5>> out;
    for (const auto& r : truth) {
        if (r.kind != "coef") continue;
        const auto cut = r.name.rfind('_');
        out[{r.unit_id, r.year, r.name.substr(0, cut)}][slot.at(r.name.substr(cut + 1))] = r.value;
    }
    return out;
}

double summary(const std::vector<TruthRecord>& truth, const std::string& name) {
    for (const auto& r : truth)
        if (r.kind == "summary" && r.name == name) return r.value;
    throw std::runtime_error("no summary " + name);
}

}  // namespace

TEST(Synth, NoiseFreeSeriesRecoverGeneratingCoefficients) {
    SynthSpec spec;
    spec.n_counties = 10;
    spec.fields_per_county = 1;
    const auto dir = testutil::fresh_dir("synth_recover");
    generate(spec, 21, dir);
    const auto ds = load_dataset(dir);
    const auto truth = read_truth(dir / "truth.csv");
    const auto coefs = coefficients(truth);
    ASSERT_EQ(coefs.size(), 20u * 4u * 6u);
    const auto cfg = spec.task_config();
    for (const auto& [key, b] : coefs) {
        const auto& [unit, year, band] = key;
        const auto window = cfg.effective_season().for_year(year);
        const auto fit = fit_harmonic(ds.series(unit).at(*parse_band(band)), window);
        double scale = 0;
        for (double v : b) scale = std::max(scale, std::fabs(v));
        const auto got = fit.coefficients();
        for (int k = 0; k < 5; ++k) ASSERT_NEAR(got[k], b[k], 1e-8 * scale) << unit << " " << year << " " << band;
    }
}

TEST(Synth, SameSeedSameBytes) {
    SynthSpec spec;
    spec.n_counties = 6;
    spec.fields_per_county = 2;
    spec.obs_sigma = 0.01;
    spec.gap_rate = 0.1;
    const auto a = testutil::fresh_dir("synth_a");
    const auto b = testutil::fresh_dir("synth_b");
    generate(spec, 8, a, 1);
    generate(spec, 8, b, 4);
    for (const char* f : {"units.csv", "observations.csv", "climate.csv", "embeddings.csv", "labels.csv", "truth.csv"})
        EXPECT_EQ(testutil::read_file(a / f), testutil::read_file(b / f)) << f;
    const auto c = testutil::fresh_dir("synth_c");
    generate(spec, 9, c);
    EXPECT_NE(testutil::read_file(a / "labels.csv"), testutil::read_file(c / "labels.csv"));
}

TEST(Synth, EveryTaskProducesLoadableBundles) {
    for (Task t : {Task::yield, Task::tillage_ratio, Task::tillage_class, Task::covercrop_class}) {
        SynthSpec spec;
        spec.task = t;
        spec.n_counties = 4;
        spec.fields_per_county = 1;
        spec.obs_sigma = 0.02;
        spec.gap_rate = 0.2;
        const auto dir = testutil::fresh_dir("synth_task");
        const auto bundle = generate(spec, 2, dir);
        const auto ds = load_dataset(dir);
        EXPECT_EQ(ds.labels().size(), bundle.labels.size());
        for (const auto& l : ds.labels()) {
            EXPECT_EQ(l.task, t);
            if (is_classification(t)) {
                EXPECT_TRUE(l.value == 0.0 || l.value == 1.0);
            }
            if (t == Task::tillage_ratio) {
                EXPECT_TRUE(l.value >= 0.0 && l.value <= 1.0);
            }
        }
    }
}

TEST(Synth, LabelVarianceMatchesSidecar) {
    SynthSpec spec;
    spec.n_counties = 250;
    spec.dropout = 0.0;
    const auto b = generate_bundle(spec, 17);
    ASSERT_GE(b.labels.size(), 1000u);
    double mean = 0, var = 0;
    for (const auto& l : b.labels) mean += l.value;
    mean /= static_cast<double>(b.labels.size());
    for (const auto& l : b.labels) var += (l.value - mean) * (l.value - mean);
    var /= static_cast<double>(b.labels.size());
    EXPECT_NEAR(var / summary(b.truth, "label_variance"), 1.0, 0.05);
    EXPECT_NEAR(summary(b.truth, "r2_ceiling"), 0.9, 1e-12);
    EXPECT_NEAR(1.0 - b.summary.label_sigma * b.summary.label_sigma / b.summary.label_variance, 0.9, 1e-12);
}

TEST(Synth, LabelsFollowPlantedSignal) {
    SynthSpec spec;
    spec.n_counties = 20;
    spec.label_sigma = 0.0;
    spec.label_terms = {{"GCVI_peak", 2.0}, {"NDVI_c", -1.0}};
    spec.label_intercept = 3.0;
    const auto b = generate_bundle(spec, 4);
    std::map<std::pair<std::string, int>, std::map<std::string, double>> features;
    for (const auto& r : b.truth)
        if (r.kind == "feature") features[{r.unit_id, r.year}][r.name] = r.value;
    for (const auto& l : b.labels) {
        const auto& f = features.at({l.unit_id, l.year});
        EXPECT_NEAR(l.value, 3.0 + 2.0 * f.at("GCVI_peak") - f.at("NDVI_c"), 1e-12);
    }
}

TEST(Synth, RegionOffsetSeparatesEmbeddings) {
    auto mean_gap = [](double offset) {
        SynthSpec spec;
        spec.n_counties = 48;
        spec.region_offset = offset;
        const auto b = generate_bundle(spec, 6);
        std::map<std::string, Ecoregion> eco;
        for (const auto& u : b.units) eco[u.unit_id] = u.ecoregion;
        std::array<double, kEmbeddingDim> east{}, west{};
        double ne = 0, nw = 0;
        for (const auto& e : b.embeddings) {
            const bool is_east = eco.at(e.unit_id) == Ecoregion::East;
            for (std::size_t j = 0; j < kEmbeddingDim; ++j) (is_east ? east : west)[j] += e.values[j];
            (is_east ? ne : nw) += 1;
        }
        double d2 = 0;
        for (std::size_t j = 0; j < kEmbeddingDim; ++j) d2 += std::pow(east[j] / ne - west[j] / nw, 2);
        return std::sqrt(d2);
    };
    EXPECT_GT(mean_gap(1.5), 3.0 * mean_gap(0.0));
}

TEST(Synth, TruthCsvRoundTrips) {
    SynthSpec spec;
    spec.n_counties = 3;
    const auto dir = testutil::fresh_dir("synth_truth");
    const auto b = generate(spec, 1, dir);
    const auto back = read_truth(dir / "truth.csv");
    ASSERT_EQ(back.size(), b.truth.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].kind, b.truth[i].kind);
        EXPECT_EQ(back[i].name, b.truth[i].name);
        EXPECT_EQ(back[i].value, b.truth[i].value);
    }
    EXPECT_EQ(summary(back, "rows_labels"), static_cast<double>(b.labels.size()));
}

TEST(Synth, SpecValidation) {
    SynthSpec spec;
    spec.label_terms = {{"NDTI_may_max", 1.0}};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = {};
    spec.dropout = 1.0;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = {};
    spec.obs_sigma = -1;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = {};
    spec.r2_ceiling = 0;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = {};
    spec.revisit_min_days = 20;
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Synth, UnwritableDirectoryReported) {
    const auto dir = testutil::fresh_dir("synth_blocked");
    testutil::write_file(dir / "file", "x");
    SynthSpec spec;
    spec.n_counties = 2;
    EXPECT_ANY_THROW(generate(spec, 1, dir / "file" / "sub"));
}
