#include "flakevoc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "flakevoc/digest.hpp"
#include "flakevoc/error.hpp"
#include "flakevoc/model_file.hpp"
#include "flakevoc/random.hpp"
#include "flakevoc/splitter.hpp"

namespace flakevoc {

namespace {

// salts for deriving independent sub-seeds from the root seed
constexpr std::uint64_t kSaltPipelineUndersample = 1;
constexpr std::uint64_t kSaltKfold = 2;
constexpr std::uint64_t kSaltFoldUndersample = 1000;
constexpr std::uint64_t kSaltFoldModel = 2000;

struct PreparedDocs {
    std::vector<std::vector<Token>> tokens; // lexed and split
    std::vector<AuxFeatures> aux;
    std::vector<Label> labels;
    std::vector<std::string> ids;
};

PreparedDocs prepare_docs(const std::vector<LabeledTest>& dataset, const KeywordSet& keywords) {
    PreparedDocs docs;
    docs.tokens.reserve(dataset.size());
    docs.aux.reserve(dataset.size());
    docs.labels.reserve(dataset.size());
    docs.ids.reserve(dataset.size());
    for (const LabeledTest& test : dataset) {
        std::vector<Token> tokens = expand_tokens(tokenize(test.source_text, keywords));
        docs.aux.push_back(compute_aux(tokens, test.source_text, keywords));
        docs.tokens.push_back(std::move(tokens));
        docs.labels.push_back(test.label);
        docs.ids.push_back(test.test_id);
    }
    return docs;
}

double entropy2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

struct TrainedFoldModel {
    ModelBundle bundle;
};

TrainedFoldModel train_fold_model(const EvalConfig& config, const KeywordSet& keywords,
                                  const Vocabulary& vocab, const FeatureMatrix& X_train,
                                  const std::vector<Label>& y_train, std::uint64_t model_seed) {
    TrainedFoldModel trained;
    trained.bundle.kind = config.model;
    trained.bundle.scheme = config.scheme;
    trained.bundle.keywords = keywords.ordered();
    trained.bundle.vocabulary = vocab;
    switch (config.model) {
    case ModelKind::forest:
        trained.bundle.forest =
            train_random_forest(X_train, y_train, config.forest, model_seed, config.threads);
        break;
    case ModelKind::gbt:
        trained.bundle.gbt = train_gbt(X_train, y_train, config.gbt, model_seed);
        break;
    default:
        trained.bundle.baseline = BaselineModel{config.model, model_seed};
        break;
    }
    return trained;
}

} // namespace

std::string_view undersample_mode_name(UndersampleMode mode) {
    switch (mode) {
    case UndersampleMode::train_only: return "train-only";
    case UndersampleMode::pipeline: return "pipeline";
    case UndersampleMode::off: return "off";
    }
    return "train-only";
}

std::optional<UndersampleMode> parse_undersample_mode(std::string_view text) {
    if (text == "train-only" || text == "train_only") return UndersampleMode::train_only;
    if (text == "pipeline") return UndersampleMode::pipeline;
    if (text == "off") return UndersampleMode::off;
    return std::nullopt;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("fold count must be at least 2");
    if (n < static_cast<std::size_t>(k)) {
        throw DataError("dataset of size " + std::to_string(n) + " cannot be split into " +
                        std::to_string(k) + " folds");
    }
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(seed);
    rng.shuffle(indices);

    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t remainder = n % static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds;
    folds.reserve(static_cast<std::size_t>(k));
    std::size_t offset = 0;
    for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
        const std::size_t size = base + (f < remainder ? 1 : 0);
        folds.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(offset),
                           indices.begin() + static_cast<std::ptrdiff_t>(offset + size));
        offset += size;
    }
    return folds;
}

MetricsReport compute_metrics(const std::vector<Label>& predictions,
                              const std::vector<Label>& truths) {
    if (predictions.empty()) throw DataError("cannot compute metrics of an empty prediction list");
    if (predictions.size() != truths.size()) {
        throw DataError("prediction/truth length mismatch");
    }
    MetricsReport report;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool predicted_flaky = predictions[i] == Label::flaky;
        const bool is_flaky = truths[i] == Label::flaky;
        if (predicted_flaky && is_flaky) ++report.confusion.tp;
        if (predicted_flaky && !is_flaky) ++report.confusion.fp;
        if (!predicted_flaky && is_flaky) ++report.confusion.fn;
        if (!predicted_flaky && !is_flaky) ++report.confusion.tn;
    }
    const ConfusionMatrix& c = report.confusion;
    report.flaky = class_metrics(c.tp, c.fp, c.fn);
    report.non_flaky = class_metrics(c.tn, c.fn, c.fp);
    report.macro.precision = (report.flaky.precision + report.non_flaky.precision) / 2.0;
    report.macro.recall = (report.flaky.recall + report.non_flaky.recall) / 2.0;
    report.macro.f1 = (report.flaky.f1 + report.non_flaky.f1) / 2.0;
    return report;
}

double round2(double value) {
    return std::round(value * 100.0) / 100.0;
}

EvalReport cross_validate(const std::vector<LabeledTest>& dataset, const EvalConfig& config,
                          const KeywordSet& keywords) {
    std::vector<LabeledTest> balanced;
    const std::vector<LabeledTest>* data = &dataset;
    if (config.undersample == UndersampleMode::pipeline) {
        balanced = undersample(dataset, derive_seed(config.seed, kSaltPipelineUndersample));
        data = &balanced;
    }

    const std::size_t n = data->size();
    std::size_t n_flaky = 0;
    for (const LabeledTest& t : *data) {
        if (t.label == Label::flaky) ++n_flaky;
    }
    const std::size_t n_non_flaky = n - n_flaky;
    if (n_flaky == 0 || n_non_flaky == 0) {
        throw DataError("degenerate dataset: both classes are required for evaluation");
    }
    const std::size_t minority = std::min(n_flaky, n_non_flaky);
    if (minority < static_cast<std::size_t>(config.k)) {
        throw DataError("fold count " + std::to_string(config.k) +
                        " exceeds the minority class size " + std::to_string(minority));
    }

    const PreparedDocs docs = prepare_docs(*data, keywords);
    const auto folds = kfold_split(n, config.k, derive_seed(config.seed, kSaltKfold));

    EvalReport report;
    report.config = config;
    report.dataset_size = n;
    report.n_flaky = n_flaky;
    report.n_non_flaky = n_non_flaky;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::vector<std::size_t>& test_idx = folds[f];
        std::vector<std::size_t> train_idx;
        train_idx.reserve(n - test_idx.size());
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g == f) continue;
            train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }

        std::vector<Label> train_labels;
        train_labels.reserve(train_idx.size());
        for (const std::size_t i : train_idx) train_labels.push_back(docs.labels[i]);
        const bool has_flaky = std::find(train_labels.begin(), train_labels.end(),
                                         Label::flaky) != train_labels.end();
        const bool has_non_flaky = std::find(train_labels.begin(), train_labels.end(),
                                             Label::non_flaky) != train_labels.end();
        if (!has_flaky || !has_non_flaky) {
            throw DataError("degenerate fold " + std::to_string(f + 1) +
                            ": training portion holds a single class");
        }

        if (config.undersample == UndersampleMode::train_only) {
            const auto kept = undersample_indices(
                train_labels, derive_seed(config.seed, kSaltFoldUndersample + f));
            std::vector<std::size_t> balanced_idx;
            balanced_idx.reserve(kept.size());
            for (const std::size_t pos : kept) balanced_idx.push_back(train_idx[pos]);
            train_idx = std::move(balanced_idx);
            train_labels.clear();
            for (const std::size_t i : train_idx) train_labels.push_back(docs.labels[i]);
        }

        std::vector<std::vector<Token>> train_docs;
        std::vector<std::string> train_ids;
        std::vector<AuxFeatures> train_aux;
        train_docs.reserve(train_idx.size());
        for (const std::size_t i : train_idx) {
            train_docs.push_back(docs.tokens[i]);
            train_ids.push_back(docs.ids[i]);
            train_aux.push_back(docs.aux[i]);
        }

        const Vocabulary vocab = Vocabulary::fit(train_docs, train_labels);
        const FeatureMatrix X_train =
            append_aux(embed_corpus(config.scheme, train_docs, train_ids, vocab), train_aux,
                       keywords);

        const std::uint64_t model_seed = derive_seed(config.seed, kSaltFoldModel + f);
        const TrainedFoldModel trained =
            train_fold_model(config, keywords, vocab, X_train, train_labels, model_seed);

        std::vector<std::vector<Token>> test_docs;
        std::vector<std::string> test_ids;
        std::vector<AuxFeatures> test_aux;
        std::vector<Label> test_labels;
        for (const std::size_t i : test_idx) {
            test_docs.push_back(docs.tokens[i]);
            test_ids.push_back(docs.ids[i]);
            test_aux.push_back(docs.aux[i]);
            test_labels.push_back(docs.labels[i]);
        }
        const FeatureMatrix X_test =
            append_aux(embed_corpus(config.scheme, test_docs, test_ids, vocab), test_aux, keywords);

        const std::vector<Label> predictions =
            labels_from_proba(trained.bundle.predict_proba(X_test));

        FoldResult fold;
        fold.fold = f + 1;
        fold.train_size = train_idx.size();
        fold.test_size = test_idx.size();
        fold.metrics = compute_metrics(predictions, test_labels);
        fold.vocab_hash = vocab.content_hash(config.scheme);
        fold.model_hash = fnv1a64(serialize_model_bundle(trained.bundle));
        report.folds.push_back(std::move(fold));
    }

    const double k_folds = static_cast<double>(report.folds.size());
    auto aggregate = [&](auto&& pick) {
        double sum = 0.0;
        for (const FoldResult& fold : report.folds) sum += round2(pick(fold.metrics));
        return sum / k_folds;
    };
    report.flaky.precision = aggregate([](const MetricsReport& m) { return m.flaky.precision; });
    report.flaky.recall = aggregate([](const MetricsReport& m) { return m.flaky.recall; });
    report.flaky.f1 = aggregate([](const MetricsReport& m) { return m.flaky.f1; });
    report.non_flaky.precision =
        aggregate([](const MetricsReport& m) { return m.non_flaky.precision; });
    report.non_flaky.recall = aggregate([](const MetricsReport& m) { return m.non_flaky.recall; });
    report.non_flaky.f1 = aggregate([](const MetricsReport& m) { return m.non_flaky.f1; });
    report.macro.precision = aggregate([](const MetricsReport& m) { return m.macro.precision; });
    report.macro.recall = aggregate([](const MetricsReport& m) { return m.macro.recall; });
    report.macro.f1 = aggregate([](const MetricsReport& m) { return m.macro.f1; });
    return report;
}

double information_gain(const std::vector<bool>& presence, const std::vector<Label>& labels) {
    if (presence.size() != labels.size()) throw DataError("presence/label length mismatch");
    if (presence.empty()) throw DataError("cannot compute information gain of an empty table");
    std::size_t in_flaky = 0, in_non_flaky = 0, n_flaky = 0;
    for (std::size_t i = 0; i < presence.size(); ++i) {
        const bool flaky = labels[i] == Label::flaky;
        if (flaky) ++n_flaky;
        if (presence[i]) {
            if (flaky) {
                ++in_flaky;
            } else {
                ++in_non_flaky;
            }
        }
    }
    return information_gain_counts(in_flaky, in_non_flaky, n_flaky,
                                   presence.size() - n_flaky);
}

double information_gain_counts(std::size_t in_flaky, std::size_t in_non_flaky,
                               std::size_t n_flaky, std::size_t n_non_flaky) {
    const double n = static_cast<double>(n_flaky + n_non_flaky);
    if (n == 0.0) throw DataError("cannot compute information gain of an empty table");
    const double present = static_cast<double>(in_flaky + in_non_flaky);
    const double absent = n - present;
    const double prior = entropy2(static_cast<double>(n_flaky) / n);
    double conditional = 0.0;
    if (present > 0.0) {
        conditional += (present / n) * entropy2(static_cast<double>(in_flaky) / present);
    }
    if (absent > 0.0) {
        conditional += (absent / n) * entropy2(static_cast<double>(n_flaky - in_flaky) / absent);
    }
    double gain = prior - conditional;
    if (gain < 0.0 && gain > -1e-12) gain = 0.0; // float dust on independent features
    return gain;
}

VocabularyReport vocabulary_report(const std::vector<LabeledTest>& dataset, std::size_t top_k,
                                   const KeywordSet& keywords) {
    const PreparedDocs docs = prepare_docs(dataset, keywords);
    const Vocabulary vocab = Vocabulary::fit(docs.tokens, docs.labels);

    std::vector<RankedTerm> ranked;
    ranked.reserve(vocab.size());
    for (const auto& [term, stats] : vocab.terms()) {
        ranked.push_back({term, information_gain_counts(stats.in_flaky, stats.in_non_flaky,
                                                        vocab.n_flaky(), vocab.n_non_flaky())});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedTerm& a, const RankedTerm& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.term < b.term;
    });

    VocabularyReport report;
    report.vocabulary_size = vocab.size();
    report.top_k = top_k == 0 ? ranked.size() : top_k;
    if (top_k > 0 && ranked.size() > top_k) ranked.resize(top_k);
    report.top = std::move(ranked);
    return report;
}

TokenAnalysis single_token_analysis(std::string_view token,
                                    const std::vector<LabeledTest>& dataset,
                                    const KeywordSet& keywords) {
    const PreparedDocs docs = prepare_docs(dataset, keywords);
    TokenAnalysis analysis;
    analysis.token = std::string(token);
    std::size_t n_flaky = 0, n_non_flaky = 0;
    for (std::size_t i = 0; i < docs.tokens.size(); ++i) {
        const bool flaky = docs.labels[i] == Label::flaky;
        if (flaky) {
            ++n_flaky;
        } else {
            ++n_non_flaky;
        }
        const bool contains =
            std::any_of(docs.tokens[i].begin(), docs.tokens[i].end(),
                        [&](const Token& t) { return t.text == token; });
        if (!contains) continue;
        if (flaky) {
            ++analysis.flaky_containing;
        } else {
            ++analysis.non_flaky_containing;
        }
    }
    analysis.flaky_fraction =
        n_flaky > 0 ? static_cast<double>(analysis.flaky_containing) / n_flaky : 0.0;
    analysis.non_flaky_fraction =
        n_non_flaky > 0 ? static_cast<double>(analysis.non_flaky_containing) / n_non_flaky : 0.0;
    const std::size_t containing = analysis.flaky_containing + analysis.non_flaky_containing;
    if (containing > 0) {
        analysis.precision = static_cast<double>(analysis.flaky_containing) / containing;
    }
    return analysis;
}

} // namespace flakevoc
