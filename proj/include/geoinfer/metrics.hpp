#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoinfer/region.hpp"

namespace geoinfer {

// nullopt = undefined (constant input or fewer than 2 points)
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

// Fractional (average) ranks, 1-based; ties share the mean rank.
std::vector<double> average_ranks(const std::vector<double>& x);

enum class EvalSetting { unsupervised, kshot, transfer };

struct SeedEval {
    std::uint64_t seed = 0;
    std::optional<double> pearson_r;
    std::optional<double> spearman_r;
    bool degenerate = false;  // constant predictions (or labels): metrics undefined
};

struct EvalReport {
    std::string country;
    std::string indicator;
    EvalSetting setting = EvalSetting::unsupervised;
    int k = 0;
    std::string transfer_source;
    std::vector<SeedEval> per_seed;
    std::optional<double> mean_pearson, std_pearson;
    std::optional<double> mean_spearman, std_spearman;
    bool absolute = false;    // |rho| applied per seed (unsupervised)
    bool degenerate = false;  // every seed degenerate: reported N/A
};

// One prediction set per seed. Correlations are computed over regions
// present in both the predictions and the label table; |rho| is applied per
// seed in the unsupervised setting; degenerate seeds are flagged and
// excluded from the mean/std aggregation (population std).
EvalReport evaluate(const std::vector<std::map<std::string, double>>& prediction_sets,
                    const std::vector<std::uint64_t>& seeds, const LabelTable& labels,
                    EvalSetting setting, int k = 0, const std::string& transfer_source = "",
                    const std::string& country = "");

void save_report(const std::string& path, const EvalReport& report);

std::string setting_name(EvalSetting setting);

}  // namespace geoinfer
