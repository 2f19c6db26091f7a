#include "flakevoc/models.hpp"

#include <algorithm>

#include "flakevoc/error.hpp"
#include "flakevoc/random.hpp"

namespace flakevoc {

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::forest: return "forest";
    case ModelKind::gbt: return "gbt";
    case ModelKind::randomized: return "randomized";
    case ModelKind::only_true: return "only-true";
    case ModelKind::only_false: return "only-false";
    }
    return "forest";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
    if (text == "forest") return ModelKind::forest;
    if (text == "gbt") return ModelKind::gbt;
    if (text == "randomized") return ModelKind::randomized;
    if (text == "only-true" || text == "only_true") return ModelKind::only_true;
    if (text == "only-false" || text == "only_false") return ModelKind::only_false;
    return std::nullopt;
}

bool is_baseline(ModelKind kind) {
    return kind == ModelKind::randomized || kind == ModelKind::only_true ||
           kind == ModelKind::only_false;
}

std::vector<double> predict_proba(const BaselineModel& model, const FeatureMatrix& X) {
    std::vector<double> probabilities(X.rows.size(), 0.0);
    switch (model.kind) {
    case ModelKind::only_true:
        std::fill(probabilities.begin(), probabilities.end(), 1.0);
        break;
    case ModelKind::only_false:
        break;
    case ModelKind::randomized: {
        // a fresh stream per call keeps repeated predictions identical
        Rng rng(model.seed);
        for (double& p : probabilities) p = (rng.next() & 1) ? 1.0 : 0.0;
        break;
    }
    default:
        throw DataError("not a baseline model");
    }
    return probabilities;
}

std::vector<Label> labels_from_proba(const std::vector<double>& probabilities) {
    std::vector<Label> labels;
    labels.reserve(probabilities.size());
    for (const double p : probabilities) {
        labels.push_back(p >= 0.5 ? Label::flaky : Label::non_flaky);
    }
    return labels;
}

} // namespace flakevoc
