#include <gtest/gtest.h>

#include <cmath>

#include "agbench/featurize.hpp"
#include "agbench/synth.hpp"

using namespace agbench;

namespace {

TaskConfig config(Task task, Crop crop = Crop::corn, FeatureSet fs = FeatureSet::RS) {
    TaskConfig c;
    c.task = task;
    c.crop = crop;
    c.feature_set = fs;
    return c;
}

SynthBundle bundle(Task task, Crop crop = Crop::corn, double gap_rate = 0.0, std::uint64_t seed = 5) {
    SynthSpec s;
    s.task = task;
    s.crop = crop;
    s.n_counties = 12;
    s.years = {2020, 2021};
    s.gap_rate = gap_rate;
    return generate_bundle(s, seed);
}

std::size_t column_index(const FeatureTable& t, const std::string& name) {
    const auto& c = t.columns();
    return static_cast<std::size_t>(std::find(c.begin(), c.end(), name) - c.begin());
}

}  // namespace

TEST(FeatureNames, CountsPerTaskAndSet) {
    EXPECT_EQ(feature_names(config(Task::yield, Crop::corn)).size(), 90u);
    EXPECT_EQ(feature_names(config(Task::yield, Crop::soybean)).size(), 90u);
    EXPECT_EQ(feature_names(config(Task::yield, Crop::winter_wheat)).size(), 92u);
    EXPECT_EQ(feature_names(config(Task::tillage_class)).size(), 67u);
    EXPECT_EQ(feature_names(config(Task::tillage_ratio)).size(), 67u);
    EXPECT_EQ(feature_names(config(Task::covercrop_class)).size(), 144u);
    EXPECT_EQ(feature_names(config(Task::yield, Crop::corn, FeatureSet::AEF)).size(), 64u);
    EXPECT_EQ(feature_names(config(Task::tillage_class, Crop::corn, FeatureSet::AEF)).size(), 64u);
    EXPECT_EQ(feature_names(config(Task::covercrop_class, Crop::corn, FeatureSet::AEF)).size(), 128u);
}

TEST(FeatureNames, Unique) {
    for (Task t : {Task::yield, Task::tillage_class, Task::covercrop_class})
        for (FeatureSet fs : {FeatureSet::RS, FeatureSet::AEF}) {
            auto names = feature_names(config(t, Crop::winter_wheat, fs));
            std::sort(names.begin(), names.end());
            EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
        }
}

TEST(AssembleTable, WidthMatchesNamesOnSynthData) {
    struct Case {
        Task task;
        Crop crop;
        FeatureSet fs;
        std::size_t cols;
    };
    for (const Case& c : std::vector<Case>{{Task::yield, Crop::corn, FeatureSet::RS, 90},
                                           {Task::yield, Crop::winter_wheat, FeatureSet::RS, 92},
                                           {Task::tillage_class, Crop::corn, FeatureSet::RS, 67},
                                           {Task::covercrop_class, Crop::corn, FeatureSet::RS, 144},
                                           {Task::yield, Crop::soybean, FeatureSet::AEF, 64},
                                           {Task::covercrop_class, Crop::corn, FeatureSet::AEF, 128}}) {
        const auto b = bundle(c.task, c.crop);
        const auto t = assemble_table(b.dataset(), config(c.task, c.crop, c.fs));
        EXPECT_EQ(t.cols(), c.cols) << task_name(c.task);
        EXPECT_EQ(t.rows(), b.labels.size()) << task_name(c.task);
        for (double v : t.values()) ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(AssembleTable, IndependentOfThreadCount) {
    const auto ds = bundle(Task::yield).dataset();
    const auto a = assemble_table(ds, config(Task::yield), 1);
    const auto b = assemble_table(ds, config(Task::yield), 4);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_EQ(a.keys(), b.keys());
    EXPECT_EQ(a.config_hash(), b.config_hash());
}

TEST(AssembleTable, RowsSortedByKey) {
    const auto t = assemble_table(bundle(Task::yield).dataset(), config(Task::yield));
    EXPECT_TRUE(std::is_sorted(t.keys().begin(), t.keys().end()));
}

TEST(AssembleTable, NoiseFreeFeaturesEqualGeneratorTruth) {
    const auto b = bundle(Task::yield);
    const auto t = assemble_table(b.dataset(), config(Task::yield));
    std::size_t checked = 0;
    for (const auto& rec : b.truth) {
        if (rec.kind != "feature") continue;
        const auto key = std::find(t.keys().begin(), t.keys().end(), RowKey{rec.unit_id, rec.year});
        ASSERT_NE(key, t.keys().end());
        const auto r = static_cast<std::size_t>(key - t.keys().begin());
        ASSERT_EQ(t.at(r, column_index(t, rec.name)), rec.value) << rec.unit_id << " " << rec.name;
        ++checked;
    }
    EXPECT_EQ(checked, t.rows() * t.cols());
}

TEST(AssembleTable, HarmonicColumnsMatchDirectFit) {
    const auto b = bundle(Task::yield);
    const auto ds = b.dataset();
    const auto cfg = config(Task::yield);
    const auto t = assemble_table(ds, cfg);
    const auto& key = t.keys().front();
    const auto window = cfg.effective_season().for_year(key.year);
    const auto fit = fit_harmonic(ds.series(key.unit_id).at(SpectralBand::NIR), window);
    EXPECT_EQ(t.at(0, column_index(t, "NIR_c")), fit.c);
    EXPECT_EQ(t.at(0, column_index(t, "NIR_b2")), fit.b2);
    EXPECT_EQ(t.at(0, column_index(t, "NIR_peak")), phenology_metrics(fit).peak_value);
}

TEST(AssembleTable, AefRowsCopyEmbeddings) {
    const auto b = bundle(Task::tillage_class);
    const auto ds = b.dataset();
    const auto t = assemble_table(ds, config(Task::tillage_class, Crop::corn, FeatureSet::AEF));
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const auto* e = ds.embedding(t.keys()[r].unit_id, t.keys()[r].year);
        ASSERT_NE(e, nullptr);
        for (std::size_t c = 0; c < kEmbeddingDim; ++c) ASSERT_EQ(t.at(r, c), e->values[c]);
    }
}

TEST(AssembleTable, DropVersusImpute) {
    const auto ds = bundle(Task::yield, Crop::corn, 0.5, 11).dataset();
    auto cfg = config(Task::yield);
    const auto dropped = assemble_table(ds, cfg);
    cfg.missing_policy = MissingPolicy::impute_mean;
    const auto imputed = assemble_table(ds, cfg);

    std::size_t excluded = 0, filled = 0;
    for (const auto& [cause, n] : dropped.log().excluded) excluded += n;
    for (const auto& [cause, n] : imputed.log().imputed) filled += n;
    ASSERT_GT(excluded, 0u);
    EXPECT_EQ(dropped.rows() + excluded, dropped.log().labeled_rows);
    EXPECT_EQ(imputed.rows(), imputed.log().labeled_rows);
    EXPECT_EQ(filled, excluded);
    for (double v : imputed.values()) ASSERT_TRUE(std::isfinite(v));
    EXPECT_NE(dropped.config_hash(), imputed.config_hash());

    // Complete rows are identical under both policies.
    for (std::size_t r = 0; r < dropped.rows(); ++r) {
        const auto it = std::find(imputed.keys().begin(), imputed.keys().end(), dropped.keys()[r]);
        ASSERT_NE(it, imputed.keys().end());
        const auto ri = static_cast<std::size_t>(it - imputed.keys().begin());
        for (std::size_t c = 0; c < dropped.cols(); ++c) ASSERT_EQ(dropped.at(r, c), imputed.at(ri, c));
    }
}

TEST(BuildFeatures, GapsNameTheirCause) {
    const auto b = bundle(Task::yield, Crop::corn, 1.0, 12);
    const auto ds = b.dataset();
    const auto row = build_features(ds, b.labels.front().unit_id, b.labels.front().year, config(Task::yield));
    EXPECT_EQ(row.values.size(), 90u);
    ASSERT_FALSE(row.complete());
    EXPECT_EQ(row.gaps.front(), "insufficient_observations");
    EXPECT_THROW(assemble_table(ds, config(Task::yield)), Error);
}

TEST(TaskConfig, CanonicalTracksSettings) {
    auto a = config(Task::yield);
    auto b = a;
    EXPECT_EQ(a.canonical(), b.canonical());
    b.gdd = GddThresholds{10, 30};
    // Spelling out the default thresholds hashes the same but clears the flag.
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_GT(a.flagged_defaults().size(), b.flagged_defaults().size());
    b.gdd = GddThresholds{8, 30};
    EXPECT_NE(a.canonical(), b.canonical());
    b = a;
    b.gcvi_minus_one = true;
    EXPECT_NE(a.canonical(), b.canonical());
}

TEST(TaskConfig, DefaultSeasons) {
    EXPECT_EQ(default_season(Task::yield, Crop::winter_wheat).for_year(2021).start(), make_date(2020, 9, 1));
    EXPECT_EQ(default_season(Task::yield, Crop::winter_wheat).for_year(2021).end(), make_date(2021, 7, 15));
    EXPECT_EQ(default_season(Task::covercrop_class, Crop::corn).for_year(2021).start(), make_date(2020, 10, 1));
    EXPECT_EQ(default_season(Task::yield, Crop::soybean).for_year(2021).end(), make_date(2021, 10, 31));
}
