#include "geoinfer/region.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geoinfer/csv.hpp"
#include "geoinfer/errors.hpp"
#include "geoinfer/hash.hpp"
#include "geoinfer/rng.hpp"

namespace geoinfer {

using nlohmann::json;

const Region* RegionDataset::find(const std::string& id) const {
    for (const auto& r : regions) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

const Region& RegionDataset::at(const std::string& id) const {
    const Region* r = find(id);
    if (!r) throw ValidationError("unknown region id: " + id);
    return *r;
}

std::vector<std::string> RegionDataset::region_ids() const {
    std::vector<std::string> ids;
    ids.reserve(regions.size());
    for (const auto& r : regions) ids.push_back(r.id);
    return ids;
}

std::uint64_t RegionDataset::geometry_fingerprint() const {
    Fnv1a h;
    h.add(country);
    h.add(snapshot_tag);
    for (const auto& r : regions) {
        h.add(r.id);
        for (const auto& part : r.geometry.parts) {
            h.add(static_cast<std::uint64_t>(part.holes.size()));
            for (const auto& v : part.outer) {
                h.add(v.lon);
                h.add(v.lat);
            }
            for (const auto& hole : part.holes) {
                for (const auto& v : hole) {
                    h.add(v.lon);
                    h.add(v.lat);
                }
            }
        }
    }
    return h.value();
}

IndicatorVocabulary IndicatorVocabulary::defaults() {
    IndicatorVocabulary v;
    v.entries["POP"] = {"population", UnitKind::count};
    v.entries["ELP"] = {"elderly population", UnitKind::count};
    v.entries["HER"] = {"highly educated population ratio", UnitKind::ratio};
    v.entries["LPR"] = {"labor force participation rate", UnitKind::ratio};
    v.entries["GRDP"] = {"regional GDP", UnitKind::count};
    return v;
}

const IndicatorVocabulary::Entry& IndicatorVocabulary::require(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) throw ValidationError("unknown indicator: " + code);
    return it->second;
}

namespace {

geo::Ring parse_ring(const json& coords, const std::string& label) {
    geo::Ring ring;
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2) {
            throw ParseError(label + ": ring vertex is not a [lon, lat] pair");
        }
        ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    return ring;
}

geo::Polygon parse_polygon(const json& coords, const std::string& label) {
    if (!coords.is_array() || coords.empty()) {
        throw ParseError(label + ": polygon has no rings");
    }
    geo::Polygon poly;
    poly.outer = parse_ring(coords[0], label);
    for (std::size_t i = 1; i < coords.size(); ++i) {
        poly.holes.push_back(parse_ring(coords[i], label));
    }
    return poly;
}

json ring_to_json(const geo::Ring& ring) {
    json arr = json::array();
    for (const auto& v : ring) arr.push_back(json::array({v.lon, v.lat}));
    return arr;
}

}  // namespace

RegionDataset load_regions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open region file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection") {
        throw ParseError(path + ": not a GeoJSON FeatureCollection");
    }

    RegionDataset ds;
    ds.country = doc.value("country", "");
    ds.snapshot_tag = doc.value("snapshot_tag", "");

    std::set<std::string> seen;
    std::size_t index = 0;
    for (const auto& feature : doc.value("features", json::array())) {
        const std::string label = "feature #" + std::to_string(index);
        ++index;

        Region r;
        const auto& props = feature.value("properties", json::object());
        if (!props.contains("id") || !props["id"].is_string() ||
            props["id"].get<std::string>().empty()) {
            throw ValidationError(label + ": missing or empty property \"id\"");
        }
        r.id = props["id"].get<std::string>();
        if (props.contains("name") && props["name"].is_string()) {
            r.name = props["name"].get<std::string>();
        }
        if (!seen.insert(r.id).second) {
            throw ValidationError(label + ": duplicate region id \"" + r.id + "\"");
        }

        if (!feature.contains("geometry")) throw ParseError(label + ": missing geometry");
        const auto& geom = feature["geometry"];
        const std::string type = geom.value("type", "");
        const std::string glabel = label + " (id " + r.id + ")";
        if (type == "Polygon") {
            r.geometry.parts.push_back(parse_polygon(geom["coordinates"], glabel));
        } else if (type == "MultiPolygon") {
            for (const auto& part : geom["coordinates"]) {
                r.geometry.parts.push_back(parse_polygon(part, glabel));
            }
        } else {
            throw ParseError(glabel + ": unsupported geometry type \"" + type + "\"");
        }

        try {
            geo::validate_geometry(r.geometry, glabel);
        } catch (const GeometryError& e) {
            throw ParseError(e.what());
        }
        r.centroid = geo::centroid(r.geometry);
        ds.regions.push_back(std::move(r));
    }

    if (ds.regions.size() < 2) {
        throw ValidationError(path + ": dataset needs at least 2 regions");
    }
    return ds;
}

void save_regions(const std::string& path, const RegionDataset& ds) {
    json features = json::array();
    for (const auto& r : ds.regions) {
        json props;
        props["id"] = r.id;
        if (!r.name.empty()) props["name"] = r.name;

        json geom;
        if (r.geometry.parts.size() == 1) {
            geom["type"] = "Polygon";
            json rings = json::array();
            rings.push_back(ring_to_json(r.geometry.parts[0].outer));
            for (const auto& hole : r.geometry.parts[0].holes) {
                rings.push_back(ring_to_json(hole));
            }
            geom["coordinates"] = rings;
        } else {
            geom["type"] = "MultiPolygon";
            json parts = json::array();
            for (const auto& part : r.geometry.parts) {
                json rings = json::array();
                rings.push_back(ring_to_json(part.outer));
                for (const auto& hole : part.holes) rings.push_back(ring_to_json(hole));
                parts.push_back(rings);
            }
            geom["coordinates"] = parts;
        }
        features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", geom}});
    }
    json doc;
    doc["type"] = "FeatureCollection";
    if (!ds.country.empty()) doc["country"] = ds.country;
    if (!ds.snapshot_tag.empty()) doc["snapshot_tag"] = ds.snapshot_tag;
    doc["features"] = features;

    std::ofstream out(path);
    if (!out) throw ParseError("cannot write region file: " + path);
    out << doc.dump(1) << '\n';
}

namespace {

void build_adjacency_impl(RegionDataset& ds, double tol_deg, bool prefilter_and_parallel) {
    const std::size_t n = ds.regions.size();
    ds.adjacency.clear();
    for (const auto& r : ds.regions) ds.adjacency[r.id] = {};

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (prefilter_and_parallel) {
        std::vector<geo::BBox> boxes(n);
        for (std::size_t i = 0; i < n; ++i) {
            boxes[i] = geo::bounding_box(ds.regions[i].geometry).expanded(tol_deg);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (boxes[i].intersects(boxes[j])) pairs.emplace_back(i, j);
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
    }

    std::vector<char> touching(pairs.size(), 0);
    if (prefilter_and_parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pairs.size()); ++p) {
            const auto [i, j] = pairs[static_cast<std::size_t>(p)];
            touching[static_cast<std::size_t>(p)] = geo::geometries_touch(
                ds.regions[i].geometry, ds.regions[j].geometry, tol_deg);
        }
    } else {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs[p];
            touching[p] =
                geo::geometries_touch(ds.regions[i].geometry, ds.regions[j].geometry, tol_deg);
        }
    }

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!touching[p]) continue;
        const auto [i, j] = pairs[p];
        ds.adjacency[ds.regions[i].id].insert(ds.regions[j].id);
        ds.adjacency[ds.regions[j].id].insert(ds.regions[i].id);
    }
}

}  // namespace

void build_adjacency(RegionDataset& ds, double tol_deg) {
    build_adjacency_impl(ds, tol_deg, true);
}

namespace serial {
void build_adjacency(RegionDataset& ds, double tol_deg) {
    build_adjacency_impl(ds, tol_deg, false);
}
}  // namespace serial

KShotSplit split_kshot(const RegionDataset& ds, const LabelTable& labels, int k,
                       std::uint64_t seed) {
    const auto n = static_cast<int>(ds.regions.size());
    if (k < 0 || k > n) {
        throw ValidationError("k=" + std::to_string(k) + " outside [0, N=" + std::to_string(n) +
                              "]");
    }
    std::vector<std::string> pool;
    for (const auto& r : ds.regions) {
        if (labels.values.count(r.id)) pool.push_back(r.id);
    }
    if (static_cast<int>(pool.size()) < k) {
        throw ValidationError("labeled pool smaller than k (" + std::to_string(pool.size()) +
                              " < " + std::to_string(k) + ")");
    }

    Rng rng(seed, /*stream=*/1);
    rng.shuffle(pool);

    KShotSplit split;
    split.k = k;
    split.seed = seed;
    std::set<std::string> chosen(pool.begin(), pool.begin() + k);
    for (int i = 0; i < k; ++i) {
        split.labeled.emplace_back(pool[static_cast<std::size_t>(i)],
                                   labels.values.at(pool[static_cast<std::size_t>(i)]));
    }
    for (const auto& r : ds.regions) {
        if (!chosen.count(r.id)) split.unlabeled.push_back(r.id);
    }
    return split;
}

std::map<std::string, LabelTable> load_labels(const std::string& path, const RegionDataset& ds,
                                              const IndicatorVocabulary& vocab) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != csv::Row{"region_id", "indicator", "value"}) {
        throw ParseError(path + ": expected header region_id,indicator,value");
    }
    std::map<std::string, LabelTable> tables;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 3) {
            throw ParseError(path + ": row " + std::to_string(i + 1) + " has " +
                             std::to_string(row.size()) + " fields");
        }
        if (!ds.find(row[0])) {
            throw ValidationError(path + ": row " + std::to_string(i + 1) +
                                  " references unknown region id \"" + row[0] + "\"");
        }
        const auto& entry = vocab.require(row[1]);
        auto& table = tables[row[1]];
        table.indicator = row[1];
        table.unit_kind = entry.unit_kind;
        double value;
        try {
            value = std::stod(row[2]);
        } catch (const std::exception&) {
            throw ParseError(path + ": row " + std::to_string(i + 1) + " has non-numeric value");
        }
        if (entry.unit_kind == UnitKind::count && value < 0.0) {
            throw ValidationError(path + ": negative count value for " + row[0]);
        }
        table.values[row[0]] = value;
    }
    // percent-style ratio labels ("57.3") are rescaled to [0,1]
    for (auto& [code, table] : tables) {
        if (table.unit_kind != UnitKind::ratio) continue;
        double max_v = 0.0;
        for (const auto& [id, v] : table.values) max_v = std::max(max_v, v);
        if (max_v > 1.5) {
            for (auto& [id, v] : table.values) v /= 100.0;
        }
        for (const auto& [id, v] : table.values) {
            if (v < 0.0 || v > 1.0) {
                throw ValidationError(path + ": ratio value out of [0,1] for " + id);
            }
        }
    }
    return tables;
}

void save_labels(const std::string& path, const std::vector<LabelTable>& tables) {
    std::vector<csv::Row> rows{{"region_id", "indicator", "value"}};
    for (const auto& table : tables) {
        for (const auto& [id, v] : table.values) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            rows.push_back({id, table.indicator, os.str()});
        }
    }
    csv::write_file(path, rows);
}

std::vector<TargetEntity> load_targets(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != csv::Row{"class", "name", "lon", "lat"}) {
        throw ParseError(path + ": expected header class,name,lon,lat");
    }
    std::vector<TargetEntity> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 4) throw ParseError(path + ": malformed row " + std::to_string(i + 1));
        TargetEntity t;
        t.cls = row[0];
        t.name = row[1];
        t.location = {std::stod(row[2]), std::stod(row[3])};
        if (t.cls != "airport" && t.cls != "port") {
            throw ValidationError(path + ": unknown target class \"" + t.cls + "\"");
        }
        if (t.location.lon < -180.0 || t.location.lon > 180.0 || t.location.lat < -90.0 ||
            t.location.lat > 90.0) {
            throw ValidationError(path + ": target coordinates out of range in row " +
                                  std::to_string(i + 1));
        }
        out.push_back(std::move(t));
    }
    return out;
}

void save_targets(const std::string& path, const std::vector<TargetEntity>& targets) {
    std::vector<csv::Row> rows{{"class", "name", "lon", "lat"}};
    for (const auto& t : targets) {
        std::ostringstream lon, lat;
        lon.precision(17);
        lat.precision(17);
        lon << t.location.lon;
        lat << t.location.lat;
        rows.push_back({t.cls, t.name, lon.str(), lat.str()});
    }
    csv::write_file(path, rows);
}

Gazetteer load_gazetteer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open gazetteer: " + path);
    Gazetteer g;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("region_id,", 0) == 0) continue;
            throw ParseError(path + ": expected header region_id,address");
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path + ": gazetteer row without address: " + line);
        }
        std::string id = line.substr(0, comma);
        std::string address = line.substr(comma + 1);
        // tolerate a fully quoted address field
        if (address.size() >= 2 && address.front() == '"' && address.back() == '"') {
            std::string unquoted;
            for (std::size_t i = 1; i + 1 < address.size(); ++i) {
                if (address[i] == '"' && i + 2 < address.size() && address[i + 1] == '"') {
                    unquoted.push_back('"');
                    ++i;
                } else {
                    unquoted.push_back(address[i]);
                }
            }
            address = unquoted;
        }
        g[id] = address;
    }
    return g;
}

void save_gazetteer(const std::string& path, const Gazetteer& gazetteer) {
    std::ofstream out(path);
    out << "region_id,address\n";
    for (const auto& [id, address] : gazetteer) {
        out << id << ',' << address << '\n';
    }
}

void save_adjacency(const std::string& path, const RegionDataset& ds) {
    json j;
    for (const auto& [id, nbrs] : ds.adjacency) {
        j[id] = json::array();
        for (const auto& n : nbrs) j[id].push_back(n);
    }
    std::ofstream out(path);
    out << j.dump(1) << '\n';
}

void load_adjacency(const std::string& path, RegionDataset& ds) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open adjacency file: " + path);
    json j;
    in >> j;
    ds.adjacency.clear();
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto& set = ds.adjacency[it.key()];
        for (const auto& n : it.value()) set.insert(n.get<std::string>());
    }
}

}  // namespace geoinfer
