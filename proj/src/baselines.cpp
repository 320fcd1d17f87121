#include "geoinfer/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "geoinfer/errors.hpp"
#include "geoinfer/linalg.hpp"

namespace geoinfer {

namespace {

double nightlight_feature(const RegionDataset& ds, const Raster& raster, const std::string& id,
                          UnitKind unit_kind) {
    const ZonalStats zs = zonal_stats(raster, ds.at(id).geometry);
    return unit_kind == UnitKind::ratio ? zs.mean : zs.sum;
}

}  // namespace

PredictionMap baseline_nightlight_unsupervised(const RegionDataset& ds, const Raster& nightlight,
                                               UnitKind unit_kind) {
    PredictionMap out;
    for (const auto& region : ds.regions) {
        out[region.id] = nightlight_feature(ds, nightlight, region.id, unit_kind);
    }
    return out;
}

PredictionMap baseline_nightlight_fewshot(const RegionDataset& ds, const Raster& nightlight,
                                          const KShotSplit& split, UnitKind unit_kind) {
    if (split.labeled.empty()) {
        throw ValidationError("few-shot nightlight baseline requires k >= 1");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double k = static_cast<double>(split.labeled.size());
    std::vector<std::pair<double, double>> train;
    for (const auto& [id, y] : split.labeled) {
        const double x = nightlight_feature(ds, nightlight, id, unit_kind);
        train.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = k * sxx - sx * sx;
    double slope = 0.0, intercept = sy / k;
    if (denom != 0.0) {
        slope = (k * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / k;
    }
    // denom == 0 means an all-equal feature: fall back to the label mean

    PredictionMap out;
    for (const auto& region : ds.regions) {
        const double x = nightlight_feature(ds, nightlight, region.id, unit_kind);
        out[region.id] = slope * x + intercept;
    }
    return out;
}

PredictionMap baseline_linear_regression(const ModuleOutputTable& table,
                                         const KShotSplit& split) {
    if (split.labeled.empty()) {
        throw ValidationError("regression baseline is undefined for k = 0");
    }
    const FeatureMatrix features = raw_feature_matrix(table);

    linalg::Mat x;
    linalg::Vec y;
    for (const auto& [id, label] : split.labeled) {
        const auto& row = features.row(id);
        linalg::Vec design;
        design.reserve(row.size() + 1);
        design.push_back(1.0);  // intercept
        design.insert(design.end(), row.begin(), row.end());
        x.push_back(std::move(design));
        y.push_back(label);
    }
    const linalg::Vec w = linalg::min_norm_least_squares(x, y);

    PredictionMap out;
    for (const auto& [id, row] : features.rows) {
        double pred = w[0];
        for (std::size_t j = 0; j < row.size(); ++j) pred += w[j + 1] * row[j];
        out[id] = pred;
    }
    return out;
}

PredictionMap baseline_pca(const ModuleOutputTable& table) {
    const FeatureMatrix z = build_feature_vectors(table);
    const std::size_t n = z.rows.size();
    const std::size_t d = z.dim_names.size();
    if (n < 2 || d == 0) throw ValidationError("PCA needs >= 2 regions and >= 1 dimension");

    // population covariance of the z-scored matrix
    linalg::Mat cov(d, linalg::Vec(d, 0.0));
    for (const auto& [id, row] : z.rows) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) cov[i][j] += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov[i][j] /= static_cast<double>(n);
            cov[j][i] = cov[i][j];
        }
    }

    // power iteration with a fixed deterministic start
    linalg::Vec v(d);
    std::uint64_t lcg = 88172645463325252ULL;
    for (auto& vi : v) {
        lcg = lcg * 6364136223846793005ULL + 1442695040888963407ULL;
        vi = static_cast<double>(lcg >> 11) * 0x1.0p-53 - 0.5;
    }
    auto normalize = [](linalg::Vec& u) {
        double norm = 0.0;
        for (double ui : u) norm += ui * ui;
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (double& ui : u) ui /= norm;
        }
    };
    normalize(v);

    double eigenvalue = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        linalg::Vec next = linalg::matvec(cov, v);
        double lambda = 0.0;
        for (std::size_t i = 0; i < d; ++i) lambda += v[i] * next[i];
        normalize(next);
        v = std::move(next);
        if (iter > 0 && std::fabs(lambda - eigenvalue) <= 1e-9 * std::fabs(lambda)) {
            eigenvalue = lambda;
            break;
        }
        eigenvalue = lambda;
    }

    PredictionMap out;
    for (const auto& [id, row] : z.rows) {
        double score = 0.0;
        for (std::size_t j = 0; j < d; ++j) score += row[j] * v[j];
        out[id] = score;
    }
    return out;
}

ModuleOutputTable filter_table_calls(const ModuleOutputTable& table,
                                     const std::vector<ModuleCall>& calls) {
    ModuleOutputTable out;
    out.region_order = table.region_order;
    std::vector<std::size_t> index;
    for (const auto& call : calls) {
        auto it = std::find(table.calls.begin(), table.calls.end(), call);
        if (it == table.calls.end()) {
            throw ValidationError("module table has no outputs for " + call_display(call));
        }
        index.push_back(static_cast<std::size_t>(it - table.calls.begin()));
        out.calls.push_back(call);
    }
    for (const auto& id : table.region_order) {
        const auto& results = table.results_for(id);
        auto& list = out.per_region[id];
        for (std::size_t i : index) list.push_back(results[i]);
    }
    return out;
}

}  // namespace geoinfer
