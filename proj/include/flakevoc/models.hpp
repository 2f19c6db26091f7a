#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flakevoc/features.hpp"

namespace flakevoc {

enum class ModelKind { forest, gbt, randomized, only_true, only_false };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);
bool is_baseline(ModelKind kind);

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0; // 0 = unlimited
    int min_samples_leaf = 1;
    bool bootstrap = true;
};

struct GBTParams {
    int n_rounds = 100;
    int max_depth = 6;
    double learning_rate = 0.3;
    double l2_lambda = 1.0;
};

// feature < 0 marks a leaf. Internal nodes route value <= threshold to the
// left child. Leaf probabilities sum to 1.
struct ClassNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double p_non_flaky = 0.0;
    double p_flaky = 0.0;
    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<ClassNode> nodes; // nodes[0] is the root
    double leaf_probability(const std::vector<double>& row) const; // p(flaky)
};

struct RandomForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    std::size_t n_columns = 0;
    std::size_t features_per_split = 0; // floor(sqrt(n_columns))
    std::vector<DecisionTree> trees;
};

struct RegressionNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0; // leaf output on the log-odds scale
    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;
    std::int32_t leaf_index(const std::vector<double>& row) const;
    double output(const std::vector<double>& row) const;
};

// Boosted trees over logistic-loss gradients. The prediction is
// sigmoid(base_score + learning_rate * sum of tree outputs); base_score is
// the prior log-odds of the training labels.
struct GBTModel {
    GBTParams params;
    std::uint64_t seed = 0;
    std::size_t n_columns = 0;
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
};

struct BaselineModel {
    ModelKind kind = ModelKind::only_false;
    std::uint64_t seed = 0;
};

// Grows n_trees Gini trees on bootstrap resamples, examining
// floor(sqrt(columns)) candidate features per split. Per-tree random streams
// are seeded as seed ^ tree_index, so results are identical for any thread
// count. Ties in split gain resolve to the lowest feature index, then the
// lowest threshold.
RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<Label>& y,
                                      const ForestParams& params, std::uint64_t seed,
                                      int threads = 1);

// Boosted rounds of depth-limited regression trees fit to logistic-loss
// gradients and hessians; each leaf takes the Newton value -G/(H + lambda).
// When round_train_logloss is given it receives the training log-loss after
// every round.
GBTModel train_gbt(const FeatureMatrix& X, const std::vector<Label>& y, const GBTParams& params,
                   std::uint64_t seed, std::vector<double>* round_train_logloss = nullptr);

std::vector<double> predict_proba(const RandomForestModel& model, const FeatureMatrix& X);
std::vector<double> predict_proba(const GBTModel& model, const FeatureMatrix& X);
std::vector<double> predict_proba(const BaselineModel& model, const FeatureMatrix& X);

// probability >= 0.5 -> flaky
std::vector<Label> labels_from_proba(const std::vector<double>& probabilities);

double sigmoid(double x);

} // namespace flakevoc
