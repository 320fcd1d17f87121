#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoinfer/modules.hpp"

namespace geoinfer {

// Region feature vectors in one shared dimension order. Dimensions are
// named "<call_id>.<value_name>"; the address result never contributes.
struct FeatureMatrix {
    std::vector<std::string> dim_names;
    std::map<std::string, std::vector<double>> rows;  // region id -> values
    std::vector<std::string> warnings;                // dropped dimensions

    const std::vector<double>& row(const std::string& region_id) const;
};

// Concatenates numeric module outputs in table order, unnormalized.
// (call, value) pairs that are omitted for any region are dropped with a
// warning so every row stays fully defined.
FeatureMatrix raw_feature_matrix(const ModuleOutputTable& table);

// Z-scores each dimension over all rows with the population sigma;
// zero-variance dimensions are dropped with a warning. Requires >= 2 rows.
FeatureMatrix zscore(const FeatureMatrix& raw);

// raw_feature_matrix + zscore.
FeatureMatrix build_feature_vectors(const ModuleOutputTable& table);

// Negative squared Euclidean distance; 0 only for identical vectors.
double similarity(const std::vector<double>& a, const std::vector<double>& b);

// Dimensions common to both matrices, in `a`'s order.
std::vector<std::string> shared_dims(const FeatureMatrix& a, const FeatureMatrix& b);

// Projection onto a dimension subset (names must exist in the matrix).
FeatureMatrix restrict_dims(const FeatureMatrix& m, const std::vector<std::string>& dims);

}  // namespace geoinfer
