#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flakevoc/features.hpp"
#include "flakevoc/models.hpp"

namespace flakevoc {

// Everything a later `predict` needs: the trained model plus the exact
// embedding context it was fitted with (vocabulary, scheme, keyword list).
struct ModelBundle {
    ModelKind kind = ModelKind::forest;
    WeightScheme scheme = WeightScheme::bow;
    std::vector<std::string> keywords; // aux column order
    Vocabulary vocabulary;
    std::optional<RandomForestModel> forest;
    std::optional<GBTModel> gbt;
    std::optional<BaselineModel> baseline;

    std::size_t n_columns() const;
    std::vector<double> predict_proba(const FeatureMatrix& X) const;
};

// Versioned JSON container with an FNV-1a checksum over the payload. The
// payload embeds the vocabulary and its fingerprint; serialization is
// deterministic, so save/load/save round-trips bit-exactly.
std::string serialize_model_bundle(const ModelBundle& bundle);
ModelBundle parse_model_bundle(const std::string& bytes);

void save_model_file(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model_file(const std::filesystem::path& path);

} // namespace flakevoc
