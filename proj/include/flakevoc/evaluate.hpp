#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flakevoc/features.hpp"
#include "flakevoc/ingest.hpp"
#include "flakevoc/models.hpp"

namespace flakevoc {

enum class UndersampleMode { train_only, pipeline, off };

std::string_view undersample_mode_name(UndersampleMode mode);
std::optional<UndersampleMode> parse_undersample_mode(std::string_view text);

struct EvalConfig {
    int k = 5;
    std::uint64_t seed = 42;
    WeightScheme scheme = WeightScheme::bow;
    ModelKind model = ModelKind::forest;
    UndersampleMode undersample = UndersampleMode::train_only;
    ForestParams forest;
    GBTParams gbt;
    int threads = 1;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// flaky is the positive class
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

struct MetricsReport {
    ClassMetrics flaky;
    ClassMetrics non_flaky;
    ClassMetrics macro; // unweighted mean over the two classes
    ConfusionMatrix confusion;
};

struct FoldResult {
    std::size_t fold = 0; // 1-based
    std::size_t train_size = 0; // after fold-level undersampling
    std::size_t test_size = 0;
    MetricsReport metrics;
    std::uint64_t vocab_hash = 0;
    std::uint64_t model_hash = 0;
};

struct EvalReport {
    EvalConfig config;
    std::string dataset_name;
    std::size_t dataset_size = 0; // after pipeline undersampling
    std::size_t n_flaky = 0;
    std::size_t n_non_flaky = 0;
    std::vector<FoldResult> folds;
    // arithmetic means of the per-fold values, each rounded to two decimals
    // before averaging
    ClassMetrics flaky;
    ClassMetrics non_flaky;
    ClassMetrics macro;
};

// Seed-shuffled partition of [0, n) into k folds whose sizes differ by at
// most one.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed);

// Per-class precision/recall/F1 with division-by-zero falling back to 0, plus
// the macro average.
MetricsReport compute_metrics(const std::vector<Label>& predictions,
                              const std::vector<Label>& truths);

double round2(double value);

// Leakage-safe cross-validation: each fold undersamples its training portion
// (never the held-out fold, unless pipeline mode rebalanced up front), fits
// the vocabulary and weights on training documents only, trains the
// configured model, and evaluates on the held-out fold.
EvalReport cross_validate(const std::vector<LabeledTest>& dataset, const EvalConfig& config,
                          const KeywordSet& keywords);

// IG in bits of a presence indicator against binary labels.
double information_gain(const std::vector<bool>& presence, const std::vector<Label>& labels);

// Same quantity from the 2x2 counts: a/b = flaky/non-flaky documents
// containing the term.
double information_gain_counts(std::size_t in_flaky, std::size_t in_non_flaky,
                               std::size_t n_flaky, std::size_t n_non_flaky);

struct RankedTerm {
    std::string term;
    double gain = 0.0;
};

struct VocabularyReport {
    std::size_t vocabulary_size = 0;
    std::size_t top_k = 0;
    std::vector<RankedTerm> top; // descending gain, ties lexicographic
};

// Ranks every vocabulary term of the dataset by information gain. The caller
// decides whether the dataset was undersampled first. top_k == 0 keeps all.
VocabularyReport vocabulary_report(const std::vector<LabeledTest>& dataset, std::size_t top_k,
                                   const KeywordSet& keywords);

struct TokenAnalysis {
    std::string token;
    std::size_t flaky_containing = 0;
    std::size_t non_flaky_containing = 0;
    double flaky_fraction = 0.0;
    double non_flaky_fraction = 0.0;
    std::optional<double> precision; // empty when the token occurs nowhere
};

// Occurrence counts of one token over the dataset and the precision of the
// "predict flaky when present" rule. Matches any token kind, keywords
// included.
TokenAnalysis single_token_analysis(std::string_view token,
                                    const std::vector<LabeledTest>& dataset,
                                    const KeywordSet& keywords);

} // namespace flakevoc
