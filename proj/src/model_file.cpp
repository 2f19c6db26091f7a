#include "flakevoc/model_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "flakevoc/digest.hpp"
#include "flakevoc/error.hpp"

namespace flakevoc {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "flakevoc-model";

json forest_to_json(const RandomForestModel& model) {
    json trees = json::array();
    for (const DecisionTree& tree : model.trees) {
        json nodes = json::array();
        for (const ClassNode& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p_non_flaky, n.p_flaky});
        }
        trees.push_back(std::move(nodes));
    }
    return json{{"seed", model.seed},
                {"n_columns", model.n_columns},
                {"features_per_split", model.features_per_split},
                {"params",
                 {{"n_trees", model.params.n_trees},
                  {"max_depth", model.params.max_depth},
                  {"min_samples_leaf", model.params.min_samples_leaf},
                  {"bootstrap", model.params.bootstrap}}},
                {"trees", std::move(trees)}};
}

RandomForestModel forest_from_json(const json& j) {
    RandomForestModel model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.n_columns = j.at("n_columns").get<std::size_t>();
    model.features_per_split = j.at("features_per_split").get<std::size_t>();
    const json& p = j.at("params");
    model.params.n_trees = p.at("n_trees").get<int>();
    model.params.max_depth = p.at("max_depth").get<int>();
    model.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    model.params.bootstrap = p.at("bootstrap").get<bool>();
    for (const json& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const json& n : tree_json) {
            ClassNode node;
            node.feature = n.at(0).get<std::int32_t>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<std::int32_t>();
            node.right = n.at(3).get<std::int32_t>();
            node.p_non_flaky = n.at(4).get<double>();
            node.p_flaky = n.at(5).get<double>();
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

json gbt_to_json(const GBTModel& model) {
    json trees = json::array();
    for (const RegressionTree& tree : model.trees) {
        json nodes = json::array();
        for (const RegressionNode& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        }
        trees.push_back(std::move(nodes));
    }
    return json{{"seed", model.seed},
                {"n_columns", model.n_columns},
                {"base_score", model.base_score},
                {"params",
                 {{"n_rounds", model.params.n_rounds},
                  {"max_depth", model.params.max_depth},
                  {"learning_rate", model.params.learning_rate},
                  {"l2_lambda", model.params.l2_lambda}}},
                {"trees", std::move(trees)}};
}

GBTModel gbt_from_json(const json& j) {
    GBTModel model;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.n_columns = j.at("n_columns").get<std::size_t>();
    model.base_score = j.at("base_score").get<double>();
    const json& p = j.at("params");
    model.params.n_rounds = p.at("n_rounds").get<int>();
    model.params.max_depth = p.at("max_depth").get<int>();
    model.params.learning_rate = p.at("learning_rate").get<double>();
    model.params.l2_lambda = p.at("l2_lambda").get<double>();
    for (const json& tree_json : j.at("trees")) {
        RegressionTree tree;
        for (const json& n : tree_json) {
            RegressionNode node;
            node.feature = n.at(0).get<std::int32_t>();
            node.threshold = n.at(1).get<double>();
            node.left = n.at(2).get<std::int32_t>();
            node.right = n.at(3).get<std::int32_t>();
            node.value = n.at(4).get<double>();
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

json vocabulary_to_json(const Vocabulary& vocab) {
    json terms = json::array();
    for (const auto& [term, stats] : vocab.terms()) {
        terms.push_back({term, stats.df, stats.in_flaky, stats.in_non_flaky});
    }
    return json{{"n_flaky", vocab.n_flaky()},
                {"n_nonflaky", vocab.n_non_flaky()},
                {"terms", std::move(terms)}};
}

Vocabulary vocabulary_from_json(const json& j) {
    // rebuild through the text format so indices come out identically
    std::ostringstream text;
    text << "flakevoc-vocab 1\n";
    text << "scheme\tbow\n";
    text << "n_flaky\t" << j.at("n_flaky").get<std::uint32_t>() << '\n';
    text << "n_nonflaky\t" << j.at("n_nonflaky").get<std::uint32_t>() << '\n';
    const json& terms = j.at("terms");
    text << "terms\t" << terms.size() << '\n';
    std::uint32_t index = 0;
    for (const json& t : terms) {
        text << t.at(0).get<std::string>() << '\t' << index++ << '\t'
             << t.at(1).get<std::uint32_t>() << '\t' << t.at(2).get<std::uint32_t>() << '\t'
             << t.at(3).get<std::uint32_t>() << '\n';
    }
    std::istringstream in(text.str());
    return Vocabulary::load(in).first;
}

} // namespace

std::size_t ModelBundle::n_columns() const {
    return vocabulary.size() + keywords.size() + 1;
}

std::vector<double> ModelBundle::predict_proba(const FeatureMatrix& X) const {
    if (forest) return flakevoc::predict_proba(*forest, X);
    if (gbt) return flakevoc::predict_proba(*gbt, X);
    if (baseline) return flakevoc::predict_proba(*baseline, X);
    throw DataError("model bundle holds no model");
}

std::string serialize_model_bundle(const ModelBundle& bundle) {
    json payload;
    payload["kind"] = std::string(model_kind_name(bundle.kind));
    payload["scheme"] = std::string(scheme_name(bundle.scheme));
    payload["keywords"] = bundle.keywords;
    payload["vocab_hash"] = to_hex(bundle.vocabulary.content_hash(bundle.scheme));
    payload["vocabulary"] = vocabulary_to_json(bundle.vocabulary);
    if (bundle.forest) {
        payload["model"] = forest_to_json(*bundle.forest);
    } else if (bundle.gbt) {
        payload["model"] = gbt_to_json(*bundle.gbt);
    } else if (bundle.baseline) {
        payload["model"] = json{{"seed", bundle.baseline->seed}};
    } else {
        throw DataError("model bundle holds no model");
    }

    json file;
    file["format"] = kFormatName;
    file["version"] = kFormatVersion;
    file["checksum"] = to_hex(fnv1a64(payload.dump()));
    file["payload"] = std::move(payload);
    return file.dump(2) + "\n";
}

ModelBundle parse_model_bundle(const std::string& bytes) {
    json file;
    try {
        file = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (file.at("format").get<std::string>() != kFormatName) {
            throw DataError("not a model file (unexpected format tag)");
        }
        if (file.at("version").get<int>() != kFormatVersion) {
            throw DataError("unsupported model file version " +
                            file.at("version").dump() + "; this build reads version " +
                            std::to_string(kFormatVersion));
        }
        const json& payload = file.at("payload");
        if (file.at("checksum").get<std::string>() != to_hex(fnv1a64(payload.dump()))) {
            throw DataError("model file checksum mismatch: file is corrupted or was edited");
        }

        ModelBundle bundle;
        const auto kind = parse_model_kind(payload.at("kind").get<std::string>());
        if (!kind) throw DataError("unknown model kind in model file");
        bundle.kind = *kind;
        const auto scheme = parse_scheme(payload.at("scheme").get<std::string>());
        if (!scheme) throw DataError("unknown scheme in model file");
        bundle.scheme = *scheme;
        bundle.keywords = payload.at("keywords").get<std::vector<std::string>>();
        bundle.vocabulary = vocabulary_from_json(payload.at("vocabulary"));
        if (payload.at("vocab_hash").get<std::string>() !=
            to_hex(bundle.vocabulary.content_hash(bundle.scheme))) {
            throw DataError("vocabulary fingerprint mismatch in model file");
        }

        const json& model = payload.at("model");
        switch (bundle.kind) {
        case ModelKind::forest:
            bundle.forest = forest_from_json(model);
            break;
        case ModelKind::gbt:
            bundle.gbt = gbt_from_json(model);
            break;
        default:
            bundle.baseline = BaselineModel{bundle.kind, model.at("seed").get<std::uint64_t>()};
            break;
        }
        return bundle;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model_file(const std::filesystem::path& path, const ModelBundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out << serialize_model_bundle(bundle);
}

ModelBundle load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return parse_model_bundle(bytes.str());
}

} // namespace flakevoc
