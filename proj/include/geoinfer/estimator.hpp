#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoinfer/features.hpp"
#include "geoinfer/llm.hpp"
#include "geoinfer/prompting.hpp"
#include "geoinfer/region.hpp"
#include "geoinfer/rng.hpp"

namespace geoinfer {

enum class SelectionMode { full, no_coarse, no_fine, random_pick };

SelectionMode selection_mode_from_name(const std::string& name);
std::string selection_mode_name(SelectionMode mode);

struct EstimationConfig {
    int n_coarse = 5;  // 5 unsupervised, 3 few-shot
    int n_fine = 5;
    int init_queries = 3;
    SelectionMode selection_mode = SelectionMode::full;
    double temperature = 0.5;
    double top_p = 1.0;
    int max_tokens = 64;
    std::uint64_t seed = 0;
    std::string indicator_phrase = "population";

    // harness knobs
    long max_iterations = -1;        // stop after this many insertions (-1 = all)
    std::string checkpoint_path;     // written after every insertion when set
    bool resume = false;             // continue from checkpoint_path if present

    // defaults by setting: n_coarse = n_fine = 5 when k == 0, else 3
    static EstimationConfig for_k(int k);
};

enum class Provenance { init, loop, ground_truth, baseline };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// Insertion-ordered pseudo-label set.
struct PseudoLabelStore {
    struct Entry {
        std::string region_id;
        double value = 0.0;
        Provenance provenance = Provenance::loop;
    };
    std::vector<Entry> entries;

    bool contains(const std::string& id) const;
    double value_of(const std::string& id) const;
    std::vector<std::pair<std::string, double>> values() const;
};

// Quantile-spaced picks over the store sorted by value: rank positions
// round(i*(S-1)/(n_coarse-1)) with half-up rounding; always includes the
// min and max entries; duplicates collapse; the whole store when S <= n.
std::vector<std::string> select_coarse(const std::vector<std::pair<std::string, double>>& store,
                                       int n_coarse);

// The n_fine store members most similar to the target (negative squared
// Euclidean distance), ties broken by lexically smaller region id.
std::vector<std::string> select_fine(const std::vector<std::string>& store_ids,
                                     const FeatureMatrix& vectors, const std::string& target_id,
                                     int n_fine);

struct DemonstrationPick {
    std::vector<std::string> ids;        // coarse+fine union in final order
    std::vector<std::string> coarse_ids; // the quantile picks within `ids`
    std::vector<std::string> fine_rank;  // full similarity ranking (trim order)
    int requested = 0;
};

// Coarse and fine picks, deduplicated then backfilled from the next most
// similar candidates up to min(n_coarse+n_fine, store size). The no_coarse /
// no_fine / random_pick modes substitute the whole budget accordingly.
DemonstrationPick select_demonstrations(
    const std::vector<std::pair<std::string, double>>& store, const FeatureMatrix& vectors,
    const std::string& target_id, const EstimationConfig& config, Rng& rng);

struct EstimationInputs {
    const RegionDataset& dataset;
    const KShotSplit& split;
    const ModuleOutputTable& table;
    const FeatureMatrix& vectors;  // z-scored
    Backend& backend;
    const PromptTemplateSet& templates;
};

struct EstimationTrace {
    long iterations = 0;
    long completions_consumed = 0;
    long parse_retries = 0;
    long requeued = 0;
    long trimmed_demos = 0;
};

// The iterative pseudo-label loop: a seeded region is estimated first by
// averaging init_queries completions (demonstrations = the labeled split,
// empty in the unsupervised setting), then each remaining region is
// estimated once with demonstrations drawn from the growing store plus all
// labeled examples, in seeded random order. Returns one entry per initially
// unlabeled region, in insertion order.
PseudoLabelStore estimate_all(const EstimationInputs& in, const EstimationConfig& config,
                              EstimationTrace* trace = nullptr);

// Pure cross-dataset transfer: every target region is estimated
// independently with demonstrations selected from the source pool (same
// coarse/fine criteria); target pseudo-labels are never reused. Feature
// spaces are reconciled on shared dimension names and z-scored jointly.
PseudoLabelStore estimate_transfer(const RegionDataset& target_ds,
                                   const ModuleOutputTable& target_table,
                                   const RegionDataset& source_ds,
                                   const ModuleOutputTable& source_table,
                                   const LabelTable& source_labels, Backend& backend,
                                   const PromptTemplateSet& templates,
                                   const EstimationConfig& config,
                                   EstimationTrace* trace = nullptr);

// predictions.csv: region_id,indicator,prediction,provenance
void save_predictions(const std::string& path, const PseudoLabelStore& store,
                      const KShotSplit* split, const std::string& indicator);
PseudoLabelStore load_predictions(const std::string& path, std::string* indicator = nullptr);

}  // namespace geoinfer
