#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "dense_matrix.hpp"
#include "flakevoc/error.hpp"
#include "flakevoc/models.hpp"
#include "flakevoc/random.hpp"

namespace flakevoc {

namespace {

using detail::DenseColumns;

constexpr double kGainEpsilon = 1e-9;

// Grows one Gini-impurity tree over a bootstrap sample. The node index buffer
// is partitioned in place; recursion is strictly left-before-right so the
// random stream is consumed in a reproducible order.
class TreeBuilder {
public:
    TreeBuilder(const DenseColumns& data, const std::vector<Label>& labels,
                const ForestParams& params, std::size_t features_per_split, Rng& rng)
        : data_(data), labels_(labels), params_(params), features_per_split_(features_per_split),
          rng_(rng) {
        feature_pool_.resize(data.n_cols);
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    }

    DecisionTree build(std::vector<std::size_t> sample) {
        tree_.nodes.clear();
        sample_ = std::move(sample);
        build_node(0, sample_.size(), 0);
        return std::move(tree_);
    }

private:
    std::int32_t make_leaf(std::size_t lo, std::size_t hi, std::size_t flaky_count) {
        const double n = static_cast<double>(hi - lo);
        ClassNode leaf;
        leaf.p_flaky = static_cast<double>(flaky_count) / n;
        leaf.p_non_flaky = static_cast<double>(hi - lo - flaky_count) / n;
        tree_.nodes.push_back(leaf);
        return static_cast<std::int32_t>(tree_.nodes.size() - 1);
    }

    std::int32_t build_node(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t n = hi - lo;
        std::size_t flaky_count = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            if (labels_[sample_[i]] == Label::flaky) ++flaky_count;
        }
        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        if (flaky_count == 0 || flaky_count == n || depth_capped ||
            n < 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
            return make_leaf(lo, hi, flaky_count);
        }

        // sample candidate features without replacement, evaluate ascending
        const std::size_t k = std::min(features_per_split_, data_.n_cols);
        for (std::size_t i = 0; i < k && i + 1 < feature_pool_.size(); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng_.next_below(feature_pool_.size() - i));
            std::swap(feature_pool_[i], feature_pool_[j]);
        }
        std::vector<std::size_t> candidates(feature_pool_.begin(),
                                            feature_pool_.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(candidates.begin(), candidates.end());

        const double c1 = static_cast<double>(flaky_count);
        const double c0 = static_cast<double>(n - flaky_count);
        const double parent_score = (c0 * c0 + c1 * c1) / static_cast<double>(n);

        double best_score = parent_score + kGainEpsilon;
        std::int32_t best_feature = -1;
        double best_threshold = 0.0;
        const std::size_t msl = static_cast<std::size_t>(params_.min_samples_leaf);

        std::vector<std::pair<double, std::uint8_t>> values;
        values.reserve(n);
        for (const std::size_t feature : candidates) {
            const std::vector<double>& col = data_.cols[feature];
            values.clear();
            for (std::size_t i = lo; i < hi; ++i) {
                values.emplace_back(col[sample_[i]],
                                    labels_[sample_[i]] == Label::flaky ? 1 : 0);
            }
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double l0 = 0.0, l1 = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                if (values[i - 1].second) {
                    l1 += 1.0;
                } else {
                    l0 += 1.0;
                }
                if (values[i].first <= values[i - 1].first) continue; // no boundary
                const std::size_t nl = i;
                const std::size_t nr = n - i;
                if (nl < msl || nr < msl) continue;
                const double r0 = c0 - l0;
                const double r1 = c1 - l1;
                const double score = (l0 * l0 + l1 * l1) / static_cast<double>(nl) +
                                     (r0 * r0 + r1 * r1) / static_cast<double>(nr);
                if (score > best_score) {
                    best_score = score;
                    best_feature = static_cast<std::int32_t>(feature);
                    best_threshold = (values[i - 1].first + values[i].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) return make_leaf(lo, hi, flaky_count);

        const std::vector<double>& split_col = data_.cols[static_cast<std::size_t>(best_feature)];
        const auto mid_it = std::stable_partition(
            sample_.begin() + static_cast<std::ptrdiff_t>(lo),
            sample_.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::size_t idx) { return split_col[idx] <= best_threshold; });
        const std::size_t mid = static_cast<std::size_t>(mid_it - sample_.begin());

        const std::int32_t node_index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.push_back({});
        const std::int32_t left = build_node(lo, mid, depth + 1);
        const std::int32_t right = build_node(mid, hi, depth + 1);
        ClassNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }

    const DenseColumns& data_;
    const std::vector<Label>& labels_;
    const ForestParams& params_;
    std::size_t features_per_split_;
    Rng& rng_;
    std::vector<std::size_t> feature_pool_;
    std::vector<std::size_t> sample_;
    DecisionTree tree_;
};

DecisionTree build_one_tree(const DenseColumns& data, const std::vector<Label>& labels,
                            const ForestParams& params, std::size_t features_per_split,
                            std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    std::vector<std::size_t> sample(data.n_rows);
    if (params.bootstrap) {
        for (std::size_t i = 0; i < data.n_rows; ++i) {
            sample[i] = static_cast<std::size_t>(rng.next_below(data.n_rows));
        }
    } else {
        std::iota(sample.begin(), sample.end(), 0);
    }
    TreeBuilder builder(data, labels, params, features_per_split, rng);
    return builder.build(std::move(sample));
}

} // namespace

double DecisionTree::leaf_probability(const std::vector<double>& row) const {
    std::int32_t node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const ClassNode& n = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].p_flaky;
}

RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<Label>& y,
                                      const ForestParams& params, std::uint64_t seed, int threads) {
    if (X.rows.size() != y.size()) throw DataError("row/label count mismatch");
    if (X.rows.size() < 2) throw DataError("need at least 2 rows to train");
    const std::size_t flaky = static_cast<std::size_t>(
        std::count(y.begin(), y.end(), Label::flaky));
    if (flaky == 0 || flaky == y.size()) {
        throw DataError("cannot train on a single-class dataset");
    }
    if (params.n_trees < 1) throw DataError("n_trees must be at least 1");

    const DenseColumns data = detail::densify(X);
    RandomForestModel model;
    model.params = params;
    model.seed = seed;
    model.n_columns = X.n_columns;
    model.features_per_split =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(
                                     static_cast<double>(X.n_columns)))));
    model.trees.resize(static_cast<std::size_t>(params.n_trees));

    const std::size_t n_trees = model.trees.size();
    auto build_range = [&](std::size_t t) {
        model.trees[t] = build_one_tree(data, y, params, model.features_per_split,
                                        seed ^ static_cast<std::uint64_t>(t));
    };

    const std::size_t workers = std::min<std::size_t>(
        n_trees, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t t = 0; t < n_trees; ++t) build_range(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= n_trees) return;
                    build_range(t);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }
    return model;
}

std::vector<double> predict_proba(const RandomForestModel& model, const FeatureMatrix& X) {
    detail::check_columns(model.n_columns, X);
    std::vector<double> probabilities;
    probabilities.reserve(X.rows.size());
    std::vector<double> row(model.n_columns, 0.0);
    for (const SparseVector& sparse : X.rows) {
        detail::densify_row(sparse, row);
        double sum = 0.0;
        for (const DecisionTree& tree : model.trees) sum += tree.leaf_probability(row);
        probabilities.push_back(sum / static_cast<double>(model.trees.size()));
    }
    return probabilities;
}

} // namespace flakevoc
