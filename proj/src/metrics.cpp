#include "geoinfer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "geoinfer/errors.hpp"

namespace geoinfer {

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;

    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
    if (x.size() < 2) return std::nullopt;
    return pearson(average_ranks(x), average_ranks(y));
}

std::string setting_name(EvalSetting setting) {
    switch (setting) {
        case EvalSetting::unsupervised: return "unsupervised";
        case EvalSetting::kshot: return "kshot";
        case EvalSetting::transfer: return "transfer";
    }
    return "?";
}

EvalReport evaluate(const std::vector<std::map<std::string, double>>& prediction_sets,
                    const std::vector<std::uint64_t>& seeds, const LabelTable& labels,
                    EvalSetting setting, int k, const std::string& transfer_source,
                    const std::string& country) {
    if (prediction_sets.size() != seeds.size()) {
        throw ValidationError("evaluate: one seed per prediction set required");
    }
    EvalReport report;
    report.country = country;
    report.indicator = labels.indicator;
    report.setting = setting;
    report.k = k;
    report.transfer_source = transfer_source;
    report.absolute = setting == EvalSetting::unsupervised;

    for (std::size_t s = 0; s < prediction_sets.size(); ++s) {
        SeedEval seed_eval;
        seed_eval.seed = seeds[s];

        std::vector<double> pred, truth;
        for (const auto& [id, label] : labels.values) {
            auto it = prediction_sets[s].find(id);
            if (it == prediction_sets[s].end()) continue;
            pred.push_back(it->second);
            truth.push_back(label);
        }
        auto rp = pearson(pred, truth);
        auto rs = spearman(pred, truth);
        seed_eval.degenerate = !rp.has_value() || !rs.has_value();
        if (report.absolute) {
            if (rp) rp = std::fabs(*rp);
            if (rs) rs = std::fabs(*rs);
        }
        seed_eval.pearson_r = rp;
        seed_eval.spearman_r = rs;
        report.per_seed.push_back(seed_eval);
    }

    // aggregate over non-degenerate seeds only
    auto aggregate = [](const std::vector<double>& vals)
        -> std::pair<std::optional<double>, std::optional<double>> {
        if (vals.empty()) return {std::nullopt, std::nullopt};
        const double n = static_cast<double>(vals.size());
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        return {mean, std::sqrt(var / n)};  // population std
    };
    std::vector<double> ps, ss;
    for (const auto& seed_eval : report.per_seed) {
        if (seed_eval.degenerate) continue;
        if (seed_eval.pearson_r) ps.push_back(*seed_eval.pearson_r);
        if (seed_eval.spearman_r) ss.push_back(*seed_eval.spearman_r);
    }
    std::tie(report.mean_pearson, report.std_pearson) = aggregate(ps);
    std::tie(report.mean_spearman, report.std_spearman) = aggregate(ss);
    report.degenerate = ps.empty();
    return report;
}

void save_report(const std::string& path, const EvalReport& report) {
    nlohmann::json j;
    j["country"] = report.country;
    j["indicator"] = report.indicator;
    j["setting"] = setting_name(report.setting);
    if (report.setting == EvalSetting::kshot) j["k"] = report.k;
    if (report.setting == EvalSetting::transfer) j["transfer_source"] = report.transfer_source;
    j["absolute"] = report.absolute;
    j["degenerate"] = report.degenerate;

    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j["per_seed"] = nlohmann::json::array();
    for (const auto& seed_eval : report.per_seed) {
        j["per_seed"].push_back({{"seed", seed_eval.seed},
                                 {"pearson", opt(seed_eval.pearson_r)},
                                 {"spearman", opt(seed_eval.spearman_r)},
                                 {"degenerate", seed_eval.degenerate}});
    }
    j["mean_pearson"] = opt(report.mean_pearson);
    j["std_pearson"] = opt(report.std_pearson);
    j["mean_spearman"] = opt(report.mean_spearman);
    j["std_spearman"] = opt(report.std_spearman);

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write report: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace geoinfer
