#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "dense_matrix.hpp"
#include "flakevoc/error.hpp"
#include "flakevoc/models.hpp"

namespace flakevoc {

namespace {

using detail::DenseColumns;

constexpr double kGainEpsilon = 1e-12;

// Exact greedy regression tree over gradient/hessian sums. Every feature is
// examined in ascending index order; ties resolve to the lowest feature and
// then the lowest threshold. Leaves write their Newton value straight into
// the margin vector, which is safe because g and h are fixed per round.
class RegTreeBuilder {
public:
    RegTreeBuilder(const DenseColumns& data, const std::vector<double>& g,
                   const std::vector<double>& h, const GBTParams& params,
                   std::vector<double>& margins)
        : data_(data), g_(g), h_(h), params_(params), margins_(margins) {}

    RegressionTree build() {
        index_.resize(data_.n_rows);
        std::iota(index_.begin(), index_.end(), 0);
        tree_.nodes.clear();
        build_node(0, index_.size(), 0);
        return std::move(tree_);
    }

private:
    std::int32_t make_leaf(std::size_t lo, std::size_t hi, double grad_sum, double hess_sum) {
        RegressionNode leaf;
        leaf.value = -grad_sum / (hess_sum + params_.l2_lambda);
        tree_.nodes.push_back(leaf);
        for (std::size_t i = lo; i < hi; ++i) {
            margins_[index_[i]] += params_.learning_rate * leaf.value;
        }
        return static_cast<std::int32_t>(tree_.nodes.size() - 1);
    }

    std::int32_t build_node(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t n = hi - lo;
        double grad_sum = 0.0;
        double hess_sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            grad_sum += g_[index_[i]];
            hess_sum += h_[index_[i]];
        }
        if (depth >= params_.max_depth || n < 2) {
            return make_leaf(lo, hi, grad_sum, hess_sum);
        }

        const double lambda = params_.l2_lambda;
        const double parent_obj = grad_sum * grad_sum / (hess_sum + lambda);
        double best_gain = kGainEpsilon;
        std::int32_t best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::tuple<double, double, double>> values; // value, g, h
        values.reserve(n);
        for (std::size_t feature = 0; feature < data_.n_cols; ++feature) {
            const std::vector<double>& col = data_.cols[feature];
            values.clear();
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t idx = index_[i];
                values.emplace_back(col[idx], g_[idx], h_[idx]);
            }
            std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
                return std::get<0>(a) < std::get<0>(b);
            });

            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                gl += std::get<1>(values[i - 1]);
                hl += std::get<2>(values[i - 1]);
                if (std::get<0>(values[i]) <= std::get<0>(values[i - 1])) continue;
                const double gr = grad_sum - gl;
                const double hr = hess_sum - hl;
                const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                           parent_obj);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<std::int32_t>(feature);
                    best_threshold = (std::get<0>(values[i - 1]) + std::get<0>(values[i])) / 2.0;
                }
            }
        }

        if (best_feature < 0) return make_leaf(lo, hi, grad_sum, hess_sum);

        const std::vector<double>& split_col = data_.cols[static_cast<std::size_t>(best_feature)];
        const auto mid_it = std::stable_partition(
            index_.begin() + static_cast<std::ptrdiff_t>(lo),
            index_.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::size_t idx) { return split_col[idx] <= best_threshold; });
        const std::size_t mid = static_cast<std::size_t>(mid_it - index_.begin());

        const std::int32_t node_index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.push_back({});
        const std::int32_t left = build_node(lo, mid, depth + 1);
        const std::int32_t right = build_node(mid, hi, depth + 1);
        RegressionNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }

    const DenseColumns& data_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    const GBTParams& params_;
    std::vector<double>& margins_;
    std::vector<std::size_t> index_;
    RegressionTree tree_;
};

double clamped_log(double p) {
    return std::log(std::max(p, 1e-15));
}

} // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::int32_t RegressionTree::leaf_index(const std::vector<double>& row) const {
    std::int32_t node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const RegressionNode& n = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return node;
}

double RegressionTree::output(const std::vector<double>& row) const {
    return nodes[static_cast<std::size_t>(leaf_index(row))].value;
}

GBTModel train_gbt(const FeatureMatrix& X, const std::vector<Label>& y, const GBTParams& params,
                   std::uint64_t seed, std::vector<double>* round_train_logloss) {
    if (X.rows.size() != y.size()) throw DataError("row/label count mismatch");
    if (X.rows.size() < 2) throw DataError("need at least 2 rows to train");
    const std::size_t n = X.rows.size();
    const std::size_t flaky = static_cast<std::size_t>(
        std::count(y.begin(), y.end(), Label::flaky));
    if (flaky == 0 || flaky == n) throw DataError("cannot train on a single-class dataset");
    if (params.n_rounds < 1) throw DataError("n_rounds must be at least 1");
    if (params.max_depth < 0) throw DataError("max_depth must be non-negative");

    const DenseColumns data = detail::densify(X);
    const double prior = static_cast<double>(flaky) / static_cast<double>(n);

    GBTModel model;
    model.params = params;
    model.seed = seed; // no stochastic subsampling; kept for the config echo
    model.n_columns = X.n_columns;
    model.base_score = std::log(prior / (1.0 - prior));
    model.trees.reserve(static_cast<std::size_t>(params.n_rounds));

    std::vector<double> margins(n, model.base_score);
    std::vector<double> g(n), h(n);
    if (round_train_logloss) round_train_logloss->clear();

    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margins[i]);
            const double target = y[i] == Label::flaky ? 1.0 : 0.0;
            g[i] = p - target;
            h[i] = p * (1.0 - p);
        }
        RegTreeBuilder builder(data, g, h, params, margins);
        model.trees.push_back(builder.build());

        if (round_train_logloss) {
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(margins[i]);
                loss -= y[i] == Label::flaky ? clamped_log(p) : clamped_log(1.0 - p);
            }
            round_train_logloss->push_back(loss / static_cast<double>(n));
        }
    }
    return model;
}

std::vector<double> predict_proba(const GBTModel& model, const FeatureMatrix& X) {
    detail::check_columns(model.n_columns, X);
    std::vector<double> probabilities;
    probabilities.reserve(X.rows.size());
    std::vector<double> row(model.n_columns, 0.0);
    for (const SparseVector& sparse : X.rows) {
        detail::densify_row(sparse, row);
        double margin = model.base_score;
        for (const RegressionTree& tree : model.trees) {
            margin += model.params.learning_rate * tree.output(row);
        }
        probabilities.push_back(sigmoid(margin));
    }
    return probabilities;
}

} // namespace flakevoc
