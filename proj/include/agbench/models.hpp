#pragma once

// Random forest and gradient-boosted trees for regression and binary
// classification, with mean-decrease-impurity importance.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "agbench/core/csv.hpp"
#include "agbench/core/error.hpp"
#include "agbench/core/parallel.hpp"
#include "agbench/core/rng.hpp"
#include "agbench/featurize.hpp"

namespace agbench {

enum class ModelKind : std::uint8_t { RF, GBT };
enum class ModelTask : std::uint8_t { regression, classification };
enum class MaxFeatures : std::uint8_t { all, sqrt };

constexpr std::string_view model_kind_name(ModelKind k) noexcept { return k == ModelKind::RF ? "RF" : "GBT"; }
constexpr std::string_view model_task_name(ModelTask t) noexcept {
    return t == ModelTask::regression ? "regression" : "classification";
}
constexpr std::string_view max_features_name(MaxFeatures m) noexcept { return m == MaxFeatures::all ? "all" : "sqrt"; }

inline ModelTask model_task_for(Task t) noexcept {
    return is_classification(t) ? ModelTask::classification : ModelTask::regression;
}

/**
 * Hyperparameters. Unset depth/feature options resolve per kind and task:
 * RF grows unpruned trees and samples sqrt(p) features per split for
 * classification (all for regression); GBT uses depth 6 and all features.
 */
struct ModelSpec {
    ModelKind kind = ModelKind::RF;
    ModelTask task = ModelTask::regression;
    std::size_t n_trees = 200;
    std::optional<std::size_t> max_depth;
    double learning_rate = 0.1;
    std::optional<MaxFeatures> max_features;
    std::size_t min_samples_leaf = 1;
    std::uint64_t seed = 0;

    std::size_t effective_max_depth() const {
        if (max_depth) return *max_depth;
        return kind == ModelKind::GBT ? 6 : std::numeric_limits<std::size_t>::max();
    }
    MaxFeatures effective_max_features() const {
        if (max_features) return *max_features;
        return kind == ModelKind::RF && task == ModelTask::classification ? MaxFeatures::sqrt : MaxFeatures::all;
    }

    void validate() const {
        if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw std::invalid_argument("learning_rate must lie in (0, 1]");
        if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
        if (max_depth && *max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    }

    /// Key=value rendering with the seed left out (seeds vary per repeat).
    std::string canonical() const {
        std::ostringstream o;
        o << "model.kind=" << model_kind_name(kind) << "\nmodel.task=" << model_task_name(task)
          << "\nmodel.n_trees=" << n_trees << "\nmodel.max_depth="
          << (max_depth ? std::to_string(*max_depth) : std::string("default"))
          << "\nmodel.learning_rate=" << csv::format_double(learning_rate)
          << "\nmodel.max_features=" << max_features_name(effective_max_features())
          << "\nmodel.min_samples_leaf=" << min_samples_leaf << '\n';
        return o.str();
    }
};

/// Row-major, non-owning matrix.
struct MatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }

    static MatrixView of(const FeatureTable& t) { return {t.values(), t.rows(), t.cols()}; }
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;         // leaf output
    double impurity_decrease = 0.0;  // weighted by the node's share of training samples

    bool is_leaf() const noexcept { return feature < 0; }
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    double predict(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes_[i].is_leaf())
            i = static_cast<std::size_t>(x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right);
        return nodes_[i].value;
    }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::vector<TreeNode>& nodes() noexcept { return nodes_; }

    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 1}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (!nodes_[i].is_leaf()) {
                stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
                stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
            }
        }
        return best;
    }

private:
    std::vector<TreeNode> nodes_;
};

struct TrainedModel {
    ModelSpec spec;
    std::vector<DecisionTree> trees;
    std::vector<std::string> feature_names;
    std::vector<double> importance;  // sums to 1, or all zero
    double base_score = 0.0;         // GBT initial score (raw, before the link)
    std::vector<double> train_loss;  // GBT: loss before each tree and after the last
};

namespace detail {

struct GrowParams {
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_leaf = 1;
    std::size_t candidate_features = 0;  // features tried per split
    double impurity_scale = 1.0;         // 1: variance, 2: Gini on 0/1 targets
};

struct GrownTree {
    DecisionTree tree;
    std::vector<double> importance;     // per feature, unnormalized
    std::vector<std::int32_t> leaf_of;  // leaf reached by each sample position
};

/// Positions 0..m-1 ordered by (value, position) for every feature.
inline std::vector<std::vector<std::uint32_t>> presort(const std::vector<std::vector<double>>& columns) {
    std::vector<std::vector<std::uint32_t>> orders(columns.size());
    for (std::size_t f = 0; f < columns.size(); ++f) {
        auto& o = orders[f];
        o.resize(columns[f].size());
        std::iota(o.begin(), o.end(), 0u);
        const auto& col = columns[f];
        std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
            return col[a] < col[b] || (col[a] == col[b] && a < b);
        });
    }
    return orders;
}

/**
 * Greedy CART growth minimizing squared error (Gini for 0/1 targets is twice
 * the variance criterion). Splits are taken at midpoints between consecutive
 * distinct values; the first best candidate wins, so ties go to the lowest
 * feature index and then the lowest threshold.
 */
inline GrownTree grow_tree(const std::vector<std::vector<double>>& columns, std::span<const double> y,
                           std::vector<std::vector<std::uint32_t>> orders, const GrowParams& params, Rng& rng) {
    const std::size_t p = columns.size();
    const std::size_t m = y.size();
    GrownTree out;
    out.importance.assign(p, 0.0);
    out.leaf_of.assign(m, -1);
    std::vector<TreeNode> nodes(1);

    struct Pending {
        std::int32_t node;
        std::size_t begin, end, depth;  // root depth is 1
    };
    std::vector<Pending> stack{{0, 0, m, 1}};
    std::vector<std::uint8_t> goes_left(m, 0);
    std::vector<std::uint32_t> scratch(m);
    std::vector<std::size_t> feature_pool(p);
    std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
    const std::size_t k = params.candidate_features == 0 ? p : std::min(params.candidate_features, p);

    while (!stack.empty()) {
        const Pending task = stack.back();
        stack.pop_back();
        const std::size_t n = task.end - task.begin;
        const auto& first_order = orders.front();

        double sum = 0.0;
        double ymin = std::numeric_limits<double>::infinity();
        double ymax = -ymin;
        for (std::size_t i = task.begin; i < task.end; ++i) {
            const double v = y[first_order[i]];
            sum += v;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
        auto make_leaf = [&] {
            TreeNode& node = nodes[static_cast<std::size_t>(task.node)];
            node.feature = -1;
            node.value = ymin == ymax ? ymin : sum / static_cast<double>(n);
            for (std::size_t i = task.begin; i < task.end; ++i) out.leaf_of[first_order[i]] = task.node;
        };
        if (task.depth > params.max_depth || n < 2 * params.min_samples_leaf || ymin == ymax) {
            make_leaf();
            continue;
        }
        double cost = 0.0;
        for (std::size_t i = task.begin; i < task.end; ++i) {
            const double d = y[first_order[i]] - sum / static_cast<double>(n);
            cost += d * d;
        }

        std::span<std::size_t> candidates(feature_pool);
        if (k < p) {
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
                std::swap(feature_pool[i], feature_pool[j]);
            }
            std::sort(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(k));
            candidates = candidates.first(k);
        }

        const double base = sum * sum / static_cast<double>(n);
        double best_gain = 0.0;
        std::size_t best_feature = p;
        double best_threshold = 0.0;
        for (std::size_t f : candidates) {
            const auto& order = orders[f];
            const auto& col = columns[f];
            double left_sum = 0.0;
            for (std::size_t i = task.begin; i + 1 < task.end; ++i) {
                left_sum += y[order[i]];
                const std::size_t n_left = i + 1 - task.begin;
                const std::size_t n_right = n - n_left;
                if (n_left < params.min_samples_leaf) continue;
                if (n_right < params.min_samples_leaf) break;
                const double a = col[order[i]];
                const double b = col[order[i + 1]];
                if (!(a < b)) continue;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                    right_sum * right_sum / static_cast<double>(n_right) - base;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    double mid = a + (b - a) / 2.0;
                    if (!(mid < b)) mid = a;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature == p || best_gain <= 1e-12 * cost) {
            make_leaf();
            continue;
        }

        const auto& split_col = columns[best_feature];
        std::size_t n_left = 0;
        for (std::size_t i = task.begin; i < task.end; ++i) {
            const std::uint32_t pos = first_order[i];
            goes_left[pos] = split_col[pos] <= best_threshold ? 1 : 0;
            n_left += goes_left[pos];
        }
        for (auto& order : orders) {
            std::size_t l = task.begin, r = 0;
            for (std::size_t i = task.begin; i < task.end; ++i) {
                const std::uint32_t pos = order[i];
                if (goes_left[pos]) order[l++] = pos;
                else scratch[r++] = pos;
            }
            std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(r),
                      order.begin() + static_cast<std::ptrdiff_t>(l));
        }

        const auto left_id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        nodes.emplace_back();
        TreeNode& node = nodes[static_cast<std::size_t>(task.node)];
        node.feature = static_cast<std::int32_t>(best_feature);
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = left_id + 1;
        node.value = sum / static_cast<double>(n);
        node.impurity_decrease = params.impurity_scale * best_gain / static_cast<double>(m);
        out.importance[best_feature] += node.impurity_decrease;

        const std::size_t mid = task.begin + n_left;
        stack.push_back({left_id + 1, mid, task.end, task.depth + 1});
        stack.push_back({left_id, task.begin, mid, task.depth + 1});
    }
    out.tree = DecisionTree(std::move(nodes));
    return out;
}

inline std::vector<std::vector<double>> gather_columns(const MatrixView& x, std::span<const std::size_t> rows) {
    std::vector<std::vector<double>> cols(x.cols, std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = x.row(rows[i]);
        for (std::size_t f = 0; f < x.cols; ++f) cols[f][i] = r[f];
    }
    return cols;
}

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double boosting_loss(ModelTask task, std::span<const double> y, std::span<const double> score) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (task == ModelTask::regression) {
            const double d = y[i] - score[i];
            total += 0.5 * d * d;
        } else {
            total += softplus(score[i]) - y[i] * score[i];
        }
    }
    return total / static_cast<double>(y.size());
}

inline std::vector<double> normalized_importance(const std::vector<std::vector<double>>& per_tree, std::size_t p) {
    std::vector<double> imp(p, 0.0);
    for (const auto& t : per_tree)
        for (std::size_t f = 0; f < p; ++f) imp[f] += t[f];
    for (auto& v : imp) v /= static_cast<double>(per_tree.size());
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0)
        for (auto& v : imp) v /= total;
    else
        std::fill(imp.begin(), imp.end(), 0.0);
    return imp;
}

inline TrainedModel train_forest(const ModelSpec& spec, const MatrixView& x, std::span<const double> y,
                                 unsigned threads) {
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;
    GrowParams params;
    params.max_depth = spec.effective_max_depth();
    params.min_samples_leaf = spec.min_samples_leaf;
    params.candidate_features = spec.effective_max_features() == MaxFeatures::sqrt
                                    ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))))
                                    : p;
    params.impurity_scale = spec.task == ModelTask::classification ? 2.0 : 1.0;

    TrainedModel model;
    model.spec = spec;
    model.trees.resize(spec.n_trees);
    std::vector<std::vector<double>> importances(spec.n_trees);
    parallel_for(spec.n_trees, threads, [&](std::size_t t) {
        Rng rng(derive_seed(spec.seed, t));
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        std::vector<double> target(n);
        for (std::size_t i = 0; i < n; ++i) target[i] = y[rows[i]];
        auto cols = gather_columns(x, rows);
        auto orders = presort(cols);
        auto grown = grow_tree(cols, target, std::move(orders), params, rng);
        model.trees[t] = std::move(grown.tree);
        importances[t] = std::move(grown.importance);
    });
    model.importance = normalized_importance(importances, p);
    return model;
}

inline TrainedModel train_boosted(const ModelSpec& spec, const MatrixView& x, std::span<const double> y) {
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;
    GrowParams params;
    params.max_depth = spec.effective_max_depth();
    params.min_samples_leaf = spec.min_samples_leaf;
    params.candidate_features = p;

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto cols = gather_columns(x, all);
    const auto root_orders = presort(cols);

    TrainedModel model;
    model.spec = spec;
    const bool all_equal = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (spec.task == ModelTask::regression) {
        model.base_score = all_equal ? y[0] : std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    } else {
        const double prior = std::clamp(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n), 1e-6,
                                        1.0 - 1e-6);
        model.base_score = std::log(prior / (1.0 - prior));
    }

    std::vector<double> score(n, model.base_score);
    std::vector<double> residual(n);
    std::vector<double> trial(n);
    std::vector<std::vector<double>> importances;
    double loss = boosting_loss(spec.task, y, score);
    model.train_loss.push_back(loss);
    Rng unused(spec.seed);

    for (std::size_t t = 0; t < spec.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            residual[i] = spec.task == ModelTask::regression ? y[i] - score[i] : y[i] - sigmoid(score[i]);
        auto grown = grow_tree(cols, residual, root_orders, params, unused);
        auto& nodes = grown.tree.nodes();

        if (spec.task == ModelTask::classification) {
            // One Newton step per leaf: sum(r) / sum(p(1-p)).
            std::vector<double> num(nodes.size(), 0.0), den(nodes.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = static_cast<std::size_t>(grown.leaf_of[i]);
                const double prob = sigmoid(score[i]);
                num[leaf] += residual[i];
                den[leaf] += prob * (1.0 - prob);
            }
            for (std::size_t j = 0; j < nodes.size(); ++j)
                if (nodes[j].is_leaf()) nodes[j].value = den[j] > 1e-12 ? num[j] / den[j] : 0.0;
        }

        // Shrink, then halve the step until the training loss does not rise.
        double scale = spec.learning_rate;
        double next_loss = loss;
        for (int attempt = 0; attempt < 60; ++attempt) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = score[i] + scale * nodes[static_cast<std::size_t>(grown.leaf_of[i])].value;
            next_loss = boosting_loss(spec.task, y, trial);
            if (next_loss <= loss) break;
            scale /= 2.0;
        }
        if (next_loss > loss) {
            scale = 0.0;
            next_loss = loss;
        } else {
            score.swap(trial);
        }
        for (auto& node : nodes)
            if (node.is_leaf()) node.value *= scale;
        loss = next_loss;
        model.train_loss.push_back(loss);
        model.trees.push_back(std::move(grown.tree));
        importances.push_back(std::move(grown.importance));
    }
    model.importance = normalized_importance(importances, p);
    return model;
}

inline void check_columns(const std::vector<std::string>& expected, const std::vector<std::string>& got) {
    const std::size_t n = std::min(expected.size(), got.size());
    for (std::size_t i = 0; i < n; ++i)
        if (expected[i] != got[i])
            throw SchemaError("column " + std::to_string(i) + " is '" + got[i] + "', model expects '" +
                              expected[i] + "'");
    if (expected.size() != got.size())
        throw SchemaError("column '" + (got.size() > n ? got[n] : expected[n]) + "' at position " +
                          std::to_string(n) + (got.size() > n ? " is not in the model" : " is missing"));
}

}  // namespace detail

struct TrainOptions {
    unsigned threads = 1;  // RF trees only; results do not depend on it
};

/// Trains on a raw matrix; `feature_names` must have one entry per column.
inline TrainedModel train(const ModelSpec& spec, const MatrixView& x, std::span<const double> y,
                          std::vector<std::string> feature_names, const TrainOptions& opts = {}) {
    spec.validate();
    if (x.rows != y.size())
        throw std::invalid_argument("train: " + std::to_string(x.rows) + " rows but " + std::to_string(y.size()) +
                                    " labels");
    if (x.rows < 2) throw std::invalid_argument("train: need at least 2 rows");
    if (feature_names.size() != x.cols) throw std::invalid_argument("train: feature name count mismatch");
    if (spec.task == ModelTask::classification)
        for (double v : y)
            if (v != 0.0 && v != 1.0) throw std::invalid_argument("train: classification labels must be 0 or 1");
    for (double v : x.data)
        if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite feature value");

    TrainedModel m = spec.kind == ModelKind::RF ? detail::train_forest(spec, x, y, opts.threads)
                                                : detail::train_boosted(spec, x, y);
    m.feature_names = std::move(feature_names);
    return m;
}

inline TrainedModel train(const ModelSpec& spec, const FeatureTable& table, const TrainOptions& opts = {}) {
    return train(spec, MatrixView::of(table), table.labels(), table.columns(), opts);
}

/// Per-row raw outputs of every tree, tree-major ([tree][row]).
inline std::vector<std::vector<double>> tree_outputs(const TrainedModel& model, const MatrixView& x) {
    std::vector<std::vector<double>> out(model.trees.size(), std::vector<double>(x.rows));
    for (std::size_t t = 0; t < model.trees.size(); ++t)
        for (std::size_t r = 0; r < x.rows; ++r) out[t][r] = model.trees[t].predict(x.row(r));
    return out;
}

/**
 * Regression: the predicted value. Classification: probability of class 1
 * (RF: fraction of trees voting 1; GBT: logistic link of the score).
 */
inline std::vector<double> predict_score(const TrainedModel& model, const MatrixView& x) {
    if (x.cols != model.feature_names.size())
        throw SchemaError("matrix has " + std::to_string(x.cols) + " columns, model expects " +
                          std::to_string(model.feature_names.size()));
    std::vector<double> out(x.rows, 0.0);
    const bool clf = model.spec.task == ModelTask::classification;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto row = x.row(r);
        double acc = model.spec.kind == ModelKind::GBT ? model.base_score : 0.0;
        for (const auto& tree : model.trees) {
            const double v = tree.predict(row);
            if (model.spec.kind == ModelKind::GBT) acc += v;
            else acc += clf ? (v > 0.5 ? 1.0 : 0.0) : v;
        }
        if (model.spec.kind == ModelKind::RF) acc /= static_cast<double>(model.trees.size());
        else if (clf) acc = detail::sigmoid(acc);
        out[r] = acc;
    }
    return out;
}

inline std::vector<double> predict_score(const TrainedModel& model, const FeatureTable& table) {
    detail::check_columns(model.feature_names, table.columns());
    return predict_score(model, MatrixView::of(table));
}

/// Regression values, or class labels (1 iff probability > 0.5).
inline std::vector<double> predict(const TrainedModel& model, const FeatureTable& table) {
    auto s = predict_score(model, table);
    if (model.spec.task == ModelTask::classification)
        for (auto& v : s) v = v > 0.5 ? 1.0 : 0.0;
    return s;
}

inline std::vector<double> predict(const TrainedModel& model, const MatrixView& x) {
    auto s = predict_score(model, x);
    if (model.spec.task == ModelTask::classification)
        for (auto& v : s) v = v > 0.5 ? 1.0 : 0.0;
    return s;
}

struct NamedImportance {
    std::string feature;
    double importance = 0.0;
};

inline std::vector<NamedImportance> feature_importance(const TrainedModel& model) {
    std::vector<NamedImportance> out;
    for (std::size_t i = 0; i < model.feature_names.size(); ++i)
        out.push_back({model.feature_names[i], model.importance[i]});
    return out;
}

/// The k most important features, descending; ties keep column order.
inline std::vector<NamedImportance> top_features(const TrainedModel& model, std::size_t k) {
    auto all = feature_importance(model);
    std::stable_sort(all.begin(), all.end(),
                     [](const NamedImportance& a, const NamedImportance& b) { return a.importance > b.importance; });
    if (all.size() > k) all.resize(k);
    return all;
}

// ---------------------------------------------------------------------------
// Serialization: line-oriented text, numbers in shortest round-trip form.

inline constexpr std::string_view kModelMagic = "agbench-model";
inline constexpr int kModelFormatVersion = 1;

inline void save_model(const TrainedModel& m, std::ostream& out) {
    using csv::format_double;
    const auto& s = m.spec;
    out << kModelMagic << ' ' << kModelFormatVersion << '\n';
    out << "kind " << model_kind_name(s.kind) << '\n';
    out << "task " << model_task_name(s.task) << '\n';
    out << "n_trees " << s.n_trees << '\n';
    out << "max_depth " << (s.max_depth ? std::to_string(*s.max_depth) : std::string("default")) << '\n';
    out << "learning_rate " << format_double(s.learning_rate) << '\n';
    out << "max_features "
        << (s.max_features ? std::string(max_features_name(*s.max_features)) : std::string("default")) << '\n';
    out << "min_samples_leaf " << s.min_samples_leaf << '\n';
    out << "seed " << s.seed << '\n';
    out << "base_score " << format_double(m.base_score) << '\n';
    out << "features " << m.feature_names.size() << '\n';
    for (const auto& f : m.feature_names) out << f << '\n';
    out << "importance";
    for (double v : m.importance) out << ' ' << format_double(v);
    out << '\n';
    out << "train_loss " << m.train_loss.size();
    for (double v : m.train_loss) out << ' ' << format_double(v);
    out << '\n';
    out << "trees " << m.trees.size() << '\n';
    for (const auto& t : m.trees) {
        out << "tree " << t.nodes().size() << '\n';
        for (const auto& n : t.nodes())
            out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                << format_double(n.value) << ' ' << format_double(n.impurity_decrease) << '\n';
    }
    out << "end\n";
}

namespace detail {

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw Error("model file truncated");
        return w;
    }
    void expect(std::string_view keyword) {
        const auto w = word();
        if (w != keyword) throw Error("model file: expected '" + std::string(keyword) + "', found '" + w + "'");
    }
    template <class T>
    T number() {
        const auto w = word();
        T v{};
        const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) throw Error("model file: bad number '" + w + "'");
        return v;
    }
    std::string line() {
        std::string l;
        in_ >> std::ws;
        if (!std::getline(in_, l)) throw Error("model file truncated");
        return l;
    }

private:
    std::istream& in_;
};

}  // namespace detail

inline TrainedModel load_model(std::istream& in) {
    detail::ModelReader r(in);
    r.expect(kModelMagic);
    const int version = r.number<int>();
    if (version != kModelFormatVersion) throw Error("unsupported model format version " + std::to_string(version));
    TrainedModel m;
    auto& s = m.spec;
    r.expect("kind");
    const auto kind = r.word();
    if (kind == "RF") s.kind = ModelKind::RF;
    else if (kind == "GBT") s.kind = ModelKind::GBT;
    else throw Error("model file: unknown kind " + kind);
    r.expect("task");
    const auto task = r.word();
    if (task == "regression") s.task = ModelTask::regression;
    else if (task == "classification") s.task = ModelTask::classification;
    else throw Error("model file: unknown task " + task);
    r.expect("n_trees");
    s.n_trees = r.number<std::size_t>();
    r.expect("max_depth");
    if (auto d = r.word(); d != "default") s.max_depth = std::stoul(d);
    r.expect("learning_rate");
    s.learning_rate = r.number<double>();
    r.expect("max_features");
    if (auto f = r.word(); f != "default") s.max_features = f == "sqrt" ? MaxFeatures::sqrt : MaxFeatures::all;
    r.expect("min_samples_leaf");
    s.min_samples_leaf = r.number<std::size_t>();
    r.expect("seed");
    s.seed = r.number<std::uint64_t>();
    r.expect("base_score");
    m.base_score = r.number<double>();
    r.expect("features");
    const auto p = r.number<std::size_t>();
    for (std::size_t i = 0; i < p; ++i) m.feature_names.push_back(r.line());
    r.expect("importance");
    for (std::size_t i = 0; i < p; ++i) m.importance.push_back(r.number<double>());
    r.expect("train_loss");
    const auto nl = r.number<std::size_t>();
    for (std::size_t i = 0; i < nl; ++i) m.train_loss.push_back(r.number<double>());
    r.expect("trees");
    const auto nt = r.number<std::size_t>();
    for (std::size_t t = 0; t < nt; ++t) {
        r.expect("tree");
        const auto nn = r.number<std::size_t>();
        std::vector<TreeNode> nodes(nn);
        for (auto& n : nodes) {
            n.feature = r.number<std::int32_t>();
            n.threshold = r.number<double>();
            n.left = r.number<std::int32_t>();
            n.right = r.number<std::int32_t>();
            n.value = r.number<double>();
            n.impurity_decrease = r.number<double>();
            if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= nn ||
                                 static_cast<std::size_t>(n.right) >= nn || static_cast<std::size_t>(n.feature) >= p))
                throw Error("model file: corrupt tree " + std::to_string(t));
        }
        m.trees.emplace_back(std::move(nodes));
    }
    r.expect("end");
    return m;
}

}  // namespace agbench
