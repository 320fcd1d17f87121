#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geoinfer/geocoder.hpp"
#include "geoinfer/module_call.hpp"
#include "geoinfer/raster.hpp"
#include "geoinfer/region.hpp"

namespace geoinfer {

// Result of one module call on one region. Numeric calls produce named
// values ("km2"; "sum"/"mean"; "ratio"; "km"); get_address produces text.
// A result with the warning flag and no payload is omitted from paragraphs;
// a zero value with the warning flag still renders. Sentence wording lives
// in the prompt template registry keyed by (family, value name, neighbor).
struct ModuleResult {
    ModuleCall call;
    std::string text;
    std::vector<std::pair<std::string, double>> values;
    bool numeric = true;
    bool warning = false;

    bool omitted() const { return text.empty() && values.empty(); }
};

// Per-region results in one shared call order.
struct ModuleOutputTable {
    std::vector<ModuleCall> calls;
    std::vector<std::string> region_order;
    std::map<std::string, std::vector<ModuleResult>> per_region;

    const std::vector<ModuleResult>& results_for(const std::string& region_id) const;
};

struct DataSources {
    const Raster* nightlight = nullptr;   // intensity
    const Raster* landcover = nullptr;    // categorical
    const Legend* legend = nullptr;
    const std::vector<TargetEntity>* targets = nullptr;
    const Gazetteer* gazetteer = nullptr;
    Geocoder* geocoder = nullptr;
    std::string source_version;  // folded into cache fingerprints
};

ModuleResult run_module(const RegionDataset& ds, const Region& region, const ModuleCall& call,
                        const DataSources& sources);

struct ExtractStats {
    long computed = 0;
    long cache_hits = 0;
    long geocoder_requests = 0;
    std::vector<std::string> diagnostics;
};

// Applies every call to every region. Numeric calls fan out across regions
// under OpenMP and are merged in deterministic order; address lookups run
// serially (they may hit a geocoder). When cache_dir is non-empty, per-call
// CSVs keyed by a content hash of (geometry, call, source version) are
// reused and refreshed. Hard module errors abort with a per-region
// diagnostic list.
ModuleOutputTable extract_all(const RegionDataset& ds, const std::vector<ModuleCall>& calls,
                              const DataSources& sources, const std::string& cache_dir = "",
                              ExtractStats* stats = nullptr);

// module_outputs.csv: region_id,call_id,value_name,value
void save_module_table(const std::string& path, const ModuleOutputTable& table);
ModuleOutputTable load_module_table(const std::string& path, const RegionDataset& ds);

}  // namespace geoinfer
