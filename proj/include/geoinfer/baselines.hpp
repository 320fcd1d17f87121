#pragma once

#include <map>
#include <string>

#include "geoinfer/features.hpp"
#include "geoinfer/raster.hpp"
#include "geoinfer/region.hpp"

namespace geoinfer {

using PredictionMap = std::map<std::string, double>;

// Unsupervised score: zonal mean for ratio indicators, zonal sum for count
// indicators.
PredictionMap baseline_nightlight_unsupervised(const RegionDataset& ds, const Raster& nightlight,
                                               UnitKind unit_kind);

// Univariate least-squares fit on the k labeled regions, then predicted
// everywhere; an all-equal feature degenerates to the label mean.
PredictionMap baseline_nightlight_fewshot(const RegionDataset& ds, const Raster& nightlight,
                                          const KShotSplit& split, UnitKind unit_kind);

// OLS via the minimum-norm pseudoinverse on raw numeric module outputs
// (address excluded) plus an intercept column; underdetermined systems
// interpolate the labeled points exactly.
PredictionMap baseline_linear_regression(const ModuleOutputTable& table, const KShotSplit& split);

// First-principal-component scores of the z-scored module matrix; power
// iteration to 1e-9 relative eigenvalue tolerance; sign unconstrained.
PredictionMap baseline_pca(const ModuleOutputTable& table);

// Table restricted to a call subset (the "selected modules" variants).
ModuleOutputTable filter_table_calls(const ModuleOutputTable& table,
                                     const std::vector<ModuleCall>& calls);

}  // namespace geoinfer
