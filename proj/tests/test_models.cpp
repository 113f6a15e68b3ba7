#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "agbench/models.hpp"

using namespace agbench;

namespace {

struct Data {
    std::vector<double> x;
    std::vector<double> y;
    std::size_t rows = 0, cols = 0;

    MatrixView view() const { return {x, rows, cols}; }
    std::vector<std::string> names() const {
        std::vector<std::string> n;
        for (std::size_t c = 0; c < cols; ++c) n.push_back("f" + std::to_string(c));
        return n;
    }
};

/// y depends on column `informative` only, plus noise.
Data planted(std::uint64_t seed, std::size_t rows, std::size_t cols, std::size_t informative, bool classes,
             double noise = 0.1) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Data d{{}, {}, rows, cols};
    for (std::size_t r = 0; r < rows; ++r) {
        double signal = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = z(gen);
            d.x.push_back(v);
            if (c == informative) signal = v;
        }
        const double y = signal + noise * z(gen);
        d.y.push_back(classes ? (y > 0 ? 1.0 : 0.0) : y);
    }
    return d;
}

struct Split {
    std::size_t feature;
    double threshold;
    double left_mean, right_mean;
};

/// Exhaustive search for the split with the smallest summed squared error.
Split brute_force_root(const Data& d) {
    Split best{d.cols, 0, 0, 0};
    long double best_sse = 0;
    for (std::size_t f = 0; f < d.cols; ++f) {
        std::vector<double> values;
        for (std::size_t r = 0; r < d.rows; ++r) values.push_back(d.x[r * d.cols + f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = values[i] + (values[i + 1] - values[i]) / 2.0;
            long double sl = 0, sr = 0;
            std::size_t nl = 0, nr = 0;
            for (std::size_t r = 0; r < d.rows; ++r)
                if (d.x[r * d.cols + f] <= thr) sl += d.y[r], ++nl;
                else sr += d.y[r], ++nr;
            const long double ml = sl / nl, mr = sr / nr;
            long double sse = 0;
            for (std::size_t r = 0; r < d.rows; ++r) {
                const long double m = d.x[r * d.cols + f] <= thr ? ml : mr;
                sse += (d.y[r] - m) * (d.y[r] - m);
            }
            if (best.feature == d.cols || sse < best_sse) {
                best_sse = sse;
                best = {f, thr, static_cast<double>(ml), static_cast<double>(mr)};
            }
        }
    }
    return best;
}

std::string saved(const TrainedModel& m) {
    std::ostringstream o;
    save_model(m, o);
    return o.str();
}

}  // namespace

TEST(Tree, RootSplitMatchesExhaustiveSearch) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto d = planted(seed, 40 + seed, 5, seed % 5, false, 1.0);
        ModelSpec spec;
        spec.kind = ModelKind::GBT;
        spec.n_trees = 1;
        spec.max_depth = 1;
        spec.learning_rate = 1.0;
        const auto m = train(spec, d.view(), d.y, d.names());
        const auto& root = m.trees[0].nodes()[0];
        const auto ref = brute_force_root(d);
        ASSERT_EQ(static_cast<std::size_t>(root.feature), ref.feature) << seed;
        ASSERT_EQ(root.threshold, ref.threshold) << seed;
        const double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) / static_cast<double>(d.rows);
        EXPECT_NEAR(m.base_score + m.trees[0].nodes()[static_cast<std::size_t>(root.left)].value, ref.left_mean, 1e-12);
        EXPECT_NEAR(m.base_score + m.trees[0].nodes()[static_cast<std::size_t>(root.right)].value, ref.right_mean, 1e-12);
        EXPECT_NEAR(m.base_score, mean, 1e-12);
    }
}

TEST(Tree, TiesGoToLowestFeature) {
    // Two identical columns: the split must use the first.
    Data d{{}, {}, 20, 2};
    for (std::size_t r = 0; r < d.rows; ++r) {
        d.x.push_back(static_cast<double>(r));
        d.x.push_back(static_cast<double>(r));
        d.y.push_back(r < 10 ? 0.0 : 1.0);
    }
    ModelSpec spec;
    spec.kind = ModelKind::GBT;
    spec.n_trees = 1;
    spec.max_depth = 1;
    const auto m = train(spec, d.view(), d.y, d.names());
    EXPECT_EQ(m.trees[0].nodes()[0].feature, 0);
    EXPECT_EQ(m.trees[0].nodes()[0].threshold, 9.5);
}

TEST(Tree, DepthLimitRespected) {
    const auto d = planted(3, 300, 4, 1, false, 1.0);
    for (std::size_t depth : {1u, 2u, 4u}) {
        ModelSpec spec;
        spec.n_trees = 5;
        spec.max_depth = depth;
        const auto m = train(spec, d.view(), d.y, d.names());
        for (const auto& t : m.trees) EXPECT_LE(t.depth(), depth + 1);
    }
}

TEST(Train, DeterministicAndThreadIndependent) {
    const auto d = planted(4, 200, 6, 2, false);
    ModelSpec spec;
    spec.n_trees = 20;
    spec.seed = 77;
    const auto a = train(spec, d.view(), d.y, d.names(), {1});
    const auto b = train(spec, d.view(), d.y, d.names(), {4});
    EXPECT_EQ(saved(a), saved(b));
    spec.seed = 78;
    EXPECT_NE(saved(a), saved(train(spec, d.view(), d.y, d.names())));
}

TEST(Train, InformativeFeatureRanksFirst) {
    for (ModelKind kind : {ModelKind::RF, ModelKind::GBT})
        for (bool classes : {false, true}) {
            const auto d = planted(5, 300, 8, 3, classes);
            ModelSpec spec;
            spec.kind = kind;
            spec.task = classes ? ModelTask::classification : ModelTask::regression;
            spec.n_trees = 50;
            const auto m = train(spec, d.view(), d.y, d.names());
            EXPECT_EQ(top_features(m, 1).front().feature, "f3");
            EXPECT_NEAR(std::accumulate(m.importance.begin(), m.importance.end(), 0.0), 1.0, 1e-12);
            for (double v : m.importance) EXPECT_GE(v, 0.0);
        }
}

TEST(Train, PredictsHeldOutSignal) {
    const auto tr = planted(6, 400, 5, 0, false);
    const auto te = planted(7, 200, 5, 0, false);
    for (ModelKind kind : {ModelKind::RF, ModelKind::GBT}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.n_trees = 100;
        const auto m = train(spec, tr.view(), tr.y, tr.names());
        const auto p = predict(m, te.view());
        double ss = 0, st = 0, mean = std::accumulate(te.y.begin(), te.y.end(), 0.0) / te.rows;
        for (std::size_t i = 0; i < te.rows; ++i) ss += (te.y[i] - p[i]) * (te.y[i] - p[i]), st += (te.y[i] - mean) * (te.y[i] - mean);
        EXPECT_GT(1 - ss / st, 0.9) << model_kind_name(kind);
    }
}

TEST(Train, ClassificationOutputsLabels) {
    const auto d = planted(8, 200, 4, 1, true);
    for (ModelKind kind : {ModelKind::RF, ModelKind::GBT}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.task = ModelTask::classification;
        spec.n_trees = 30;
        const auto m = train(spec, d.view(), d.y, d.names());
        for (double v : predict(m, d.view())) ASSERT_TRUE(v == 0.0 || v == 1.0);
        for (double v : predict_score(m, d.view())) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    }
}

TEST(Train, BoostingLossNeverIncreases) {
    for (bool classes : {false, true}) {
        const auto d = planted(9, 150, 4, 0, classes, 0.5);
        ModelSpec spec;
        spec.kind = ModelKind::GBT;
        spec.task = classes ? ModelTask::classification : ModelTask::regression;
        spec.n_trees = 60;
        spec.learning_rate = 1.0;
        const auto m = train(spec, d.view(), d.y, d.names());
        ASSERT_EQ(m.train_loss.size(), 61u);
        for (std::size_t i = 1; i < m.train_loss.size(); ++i) ASSERT_LE(m.train_loss[i], m.train_loss[i - 1]);
    }
}

TEST(Train, RejectsBadInput) {
    auto d = planted(10, 20, 3, 0, false);
    ModelSpec spec;
    EXPECT_THROW(train(spec, d.view(), std::span<const double>(d.y).first(10), d.names()), std::invalid_argument);
    spec.task = ModelTask::classification;
    EXPECT_THROW(train(spec, d.view(), d.y, d.names()), std::invalid_argument);
    spec = {};
    spec.n_trees = 0;
    EXPECT_THROW(train(spec, d.view(), d.y, d.names()), std::invalid_argument);
    spec = {};
    spec.learning_rate = 0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    d.x[4] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(train(ModelSpec{}, d.view(), d.y, d.names()), std::invalid_argument);
}

TEST(Serialization, RoundTripPreservesPredictions) {
    for (ModelKind kind : {ModelKind::RF, ModelKind::GBT}) {
        const auto d = planted(11, 120, 4, 2, kind == ModelKind::GBT);
        ModelSpec spec;
        spec.kind = kind;
        spec.task = kind == ModelKind::GBT ? ModelTask::classification : ModelTask::regression;
        spec.n_trees = 15;
        spec.max_depth = 5;
        const auto m = train(spec, d.view(), d.y, d.names());
        const std::string text = saved(m);
        std::istringstream in(text);
        const auto back = load_model(in);
        EXPECT_EQ(saved(back), text);
        EXPECT_EQ(predict_score(back, d.view()), predict_score(m, d.view()));
        EXPECT_EQ(back.feature_names, m.feature_names);
    }
}

TEST(Serialization, CorruptFilesRejected) {
    const auto d = planted(12, 50, 3, 0, false);
    ModelSpec spec;
    spec.n_trees = 2;
    const std::string text = saved(train(spec, d.view(), d.y, d.names()));
    std::istringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(load_model(truncated), Error);
    std::istringstream wrong("agbench-model 9\n");
    EXPECT_THROW(load_model(wrong), Error);
}

TEST(Predict, ColumnMismatchIsSchemaError) {
    const auto d = planted(13, 40, 3, 0, false);
    ModelSpec spec;
    spec.n_trees = 2;
    const auto m = train(spec, d.view(), d.y, d.names());
    FeatureTable t({"f0", "f2", "f1"}, Task::yield, FeatureSet::RS);
    t.add_row({"u", 2020}, std::vector<double>{0, 0, 0}, 1.0);
    EXPECT_THROW(predict(m, t), SchemaError);
    FeatureTable narrow({"f0", "f1"}, Task::yield, FeatureSet::RS);
    narrow.add_row({"u", 2020}, std::vector<double>{0, 0}, 1.0);
    EXPECT_THROW(predict(m, narrow), SchemaError);
}
