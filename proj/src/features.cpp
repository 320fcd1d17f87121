#include "geoinfer/features.hpp"

#include <algorithm>
#include <cmath>

#include "geoinfer/errors.hpp"

namespace geoinfer {

const std::vector<double>& FeatureMatrix::row(const std::string& region_id) const {
    auto it = rows.find(region_id);
    if (it == rows.end()) throw ValidationError("no feature vector for region " + region_id);
    return it->second;
}

FeatureMatrix raw_feature_matrix(const ModuleOutputTable& table) {
    FeatureMatrix m;
    if (table.region_order.empty()) return m;

    // candidate dims from the first region, in table order
    struct Dim {
        std::size_t call_index;
        std::size_t value_index;
        std::string name;
    };
    std::vector<Dim> dims;
    const auto& first = table.results_for(table.region_order.front());
    for (std::size_t ci = 0; ci < first.size(); ++ci) {
        const auto& res = first[ci];
        if (!res.numeric) continue;
        for (std::size_t vi = 0; vi < res.values.size(); ++vi) {
            dims.push_back({ci, vi, call_id(res.call) + "." + res.values[vi].first});
        }
    }
    // drop dims not present for every region (an omitted distance call, say)
    std::vector<Dim> kept;
    for (const auto& dim : dims) {
        bool everywhere = true;
        for (const auto& id : table.region_order) {
            const auto& results = table.results_for(id);
            if (dim.call_index >= results.size() ||
                results[dim.call_index].values.size() <= dim.value_index) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) {
            kept.push_back(dim);
        } else {
            m.warnings.push_back("dimension " + dim.name + " missing for some regions; dropped");
        }
    }

    for (const auto& dim : kept) m.dim_names.push_back(dim.name);
    for (const auto& id : table.region_order) {
        const auto& results = table.results_for(id);
        auto& row = m.rows[id];
        row.reserve(kept.size());
        for (const auto& dim : kept) {
            row.push_back(results[dim.call_index].values[dim.value_index].second);
        }
    }
    return m;
}

FeatureMatrix zscore(const FeatureMatrix& raw) {
    if (raw.rows.size() < 2) {
        throw ValidationError("z-scoring needs at least 2 regions");
    }
    const std::size_t d = raw.dim_names.size();
    const double n = static_cast<double>(raw.rows.size());

    std::vector<double> mean(d, 0.0), sigma(d, 0.0);
    for (const auto& [id, row] : raw.rows) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= n;
    for (const auto& [id, row] : raw.rows) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = row[j] - mean[j];
            sigma[j] += dv * dv;
        }
    }
    for (std::size_t j = 0; j < d; ++j) sigma[j] = std::sqrt(sigma[j] / n);  // population

    FeatureMatrix out;
    out.warnings = raw.warnings;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < d; ++j) {
        if (sigma[j] > 0.0) {
            keep.push_back(j);
            out.dim_names.push_back(raw.dim_names[j]);
        } else {
            out.warnings.push_back("dimension " + raw.dim_names[j] +
                                   " has zero variance; dropped");
        }
    }
    for (const auto& [id, row] : raw.rows) {
        auto& o = out.rows[id];
        o.reserve(keep.size());
        for (std::size_t j : keep) o.push_back((row[j] - mean[j]) / sigma[j]);
    }
    return out;
}

FeatureMatrix build_feature_vectors(const ModuleOutputTable& table) {
    return zscore(raw_feature_matrix(table));
}

double similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("similarity: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return -acc;
}

std::vector<std::string> shared_dims(const FeatureMatrix& a, const FeatureMatrix& b) {
    std::vector<std::string> out;
    for (const auto& name : a.dim_names) {
        if (std::find(b.dim_names.begin(), b.dim_names.end(), name) != b.dim_names.end()) {
            out.push_back(name);
        }
    }
    return out;
}

FeatureMatrix restrict_dims(const FeatureMatrix& m, const std::vector<std::string>& dims) {
    std::vector<std::size_t> index;
    for (const auto& name : dims) {
        auto it = std::find(m.dim_names.begin(), m.dim_names.end(), name);
        if (it == m.dim_names.end()) {
            throw ValidationError("restrict_dims: unknown dimension " + name);
        }
        index.push_back(static_cast<std::size_t>(it - m.dim_names.begin()));
    }
    FeatureMatrix out;
    out.dim_names = dims;
    for (const auto& [id, row] : m.rows) {
        auto& o = out.rows[id];
        o.reserve(index.size());
        for (std::size_t j : index) o.push_back(row[j]);
    }
    return out;
}

}  // namespace geoinfer
