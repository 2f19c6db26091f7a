#pragma once

#include <vector>

#include "flakevoc/error.hpp"
#include "flakevoc/features.hpp"

namespace flakevoc::detail {

// Column-major densification shared by the tree trainers.
struct DenseColumns {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::vector<double>> cols;
};

inline DenseColumns densify(const FeatureMatrix& X) {
    DenseColumns data;
    data.n_rows = X.rows.size();
    data.n_cols = X.n_columns;
    data.cols.assign(data.n_cols, std::vector<double>(data.n_rows, 0.0));
    for (std::size_t i = 0; i < X.rows.size(); ++i) {
        for (const auto& [index, value] : X.rows[i].entries) {
            data.cols[index][i] = value;
        }
    }
    return data;
}

inline void densify_row(const SparseVector& row, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& [index, value] : row.entries) out[index] = value;
}

inline void check_columns(std::size_t model_columns, const FeatureMatrix& X) {
    if (X.n_columns != model_columns) {
        throw DataError("feature count mismatch: model expects " + std::to_string(model_columns) +
                        " columns, input has " + std::to_string(X.n_columns));
    }
}

} // namespace flakevoc::detail
