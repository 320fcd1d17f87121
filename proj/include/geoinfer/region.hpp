#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoinfer/geo.hpp"

namespace geoinfer {

struct Region {
    std::string id;
    std::string name;
    geo::Geometry geometry;
    geo::LonLat centroid;
};

// Administrative units for one country plus their queen-contiguity graph.
// Read-only after construction.
struct RegionDataset {
    std::string country;
    std::string snapshot_tag;
    std::vector<Region> regions;
    std::map<std::string, std::set<std::string>> adjacency;

    const Region* find(const std::string& id) const;
    const Region& at(const std::string& id) const;
    std::vector<std::string> region_ids() const;
    std::uint64_t geometry_fingerprint() const;
};

enum class UnitKind { count, ratio };

struct LabelTable {
    std::string indicator;
    UnitKind unit_kind = UnitKind::count;
    std::map<std::string, double> values;
};

struct KShotSplit {
    std::vector<std::pair<std::string, double>> labeled;  // size k
    std::vector<std::string> unlabeled;                   // size N - k
    int k = 0;
    std::uint64_t seed = 0;
};

struct TargetEntity {
    std::string cls;  // "airport" or "port"
    std::string name;
    geo::LonLat location;
};

// code -> {instruction phrase, unit kind}; defaults cover POP, ELP, HER,
// LPR, GRDP.
struct IndicatorVocabulary {
    struct Entry {
        std::string phrase;
        UnitKind unit_kind;
    };
    std::map<std::string, Entry> entries;

    static IndicatorVocabulary defaults();
    const Entry& require(const std::string& code) const;
};

// GeoJSON FeatureCollection restricted to Polygon/MultiPolygon; properties
// carry "id" (required) and optionally "name".
RegionDataset load_regions(const std::string& path);
void save_regions(const std::string& path, const RegionDataset& ds);

inline constexpr double kAdjacencySnapTolDeg = 1e-6;

// Queen contiguity: any shared boundary point (corner touches included)
// within the snap tolerance makes two regions neighbors.
void build_adjacency(RegionDataset& ds, double tol_deg = kAdjacencySnapTolDeg);

namespace serial {
// Reference implementation without the bounding-box prefilter or threading.
void build_adjacency(RegionDataset& ds, double tol_deg = kAdjacencySnapTolDeg);
}  // namespace serial

// Uniform draw of k labeled regions without replacement, deterministic per
// (seed, dataset order). Only regions present in the label table are
// eligible.
KShotSplit split_kshot(const RegionDataset& ds, const LabelTable& labels, int k,
                       std::uint64_t seed);

// labels.csv: region_id,indicator,value. Percent-style ratio columns are
// rescaled to [0,1].
std::map<std::string, LabelTable> load_labels(const std::string& path,
                                              const RegionDataset& ds,
                                              const IndicatorVocabulary& vocab);
void save_labels(const std::string& path, const std::vector<LabelTable>& tables);

// targets.csv: class,name,lon,lat
std::vector<TargetEntity> load_targets(const std::string& path);
void save_targets(const std::string& path, const std::vector<TargetEntity>& targets);

// gazetteer.csv: region_id,address (address may contain commas, quoted or
// not; everything after the first comma belongs to the address)
using Gazetteer = std::map<std::string, std::string>;
Gazetteer load_gazetteer(const std::string& path);
void save_gazetteer(const std::string& path, const Gazetteer& gazetteer);

// adjacency.json: {"region_id": ["neighbor", ...]}
void save_adjacency(const std::string& path, const RegionDataset& ds);
void load_adjacency(const std::string& path, RegionDataset& ds);

}  // namespace geoinfer
