#include "geoinfer/modules.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "geoinfer/csv.hpp"
#include "geoinfer/errors.hpp"
#include "geoinfer/hash.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

namespace fs = std::filesystem;

const std::vector<ModuleResult>& ModuleOutputTable::results_for(
    const std::string& region_id) const {
    auto it = per_region.find(region_id);
    if (it == per_region.end()) {
        throw ValidationError("module table has no results for region " + region_id);
    }
    return it->second;
}

namespace {

std::vector<std::string> value_names_for(ModuleFamily family) {
    switch (family) {
        case ModuleFamily::get_area: return {"km2"};
        case ModuleFamily::get_night_light: return {"sum", "mean"};
        case ModuleFamily::count_area: return {"ratio"};
        case ModuleFamily::get_distance_to_nearest_target: return {"km"};
        default: return {};
    }
}

ModuleResult run_address(const Region& region, const DataSources& sources,
                         ExtractStats* stats) {
    ModuleResult res;
    res.numeric = false;
    if (sources.gazetteer) {
        auto it = sources.gazetteer->find(region.id);
        if (it != sources.gazetteer->end()) {
            res.text = it->second;
            return res;
        }
    }
    if (sources.geocoder) {
        if (stats) ++stats->geocoder_requests;
        if (auto address = sources.geocoder->reverse(region.centroid)) {
            res.text = *address;
            return res;
        }
    }
    res.warning = true;  // sentence omitted from the paragraph
    return res;
}

ModuleResult run_area(const Region& region) {
    ModuleResult res;
    res.values.emplace_back("km2", geo::spherical_polygon_area_km2(region.geometry));
    return res;
}

ModuleResult run_night_light(const Region& region, const DataSources& sources) {
    if (!sources.nightlight) throw ModuleError("get_night_light: no nightlight raster loaded");
    const ZonalStats zs = zonal_stats(*sources.nightlight, region.geometry);
    ModuleResult res;
    res.values.emplace_back("sum", zs.sum);
    res.values.emplace_back("mean", zs.mean);
    res.warning = zs.warning;
    return res;
}

ModuleResult run_count_area(const Region& region, const std::string& cls,
                            const DataSources& sources) {
    if (!sources.landcover || !sources.legend) {
        throw ModuleError("count_area: no landcover raster/legend loaded");
    }
    const int code = sources.legend->code_for(cls);
    if (code < 0) throw ModuleError("count_area: legend has no code for class \"" + cls + "\"");
    const ClassRatio cr = class_ratio(*sources.landcover, region.geometry, code);
    ModuleResult res;
    res.values.emplace_back("ratio", cr.ratio);
    res.warning = cr.warning;
    return res;
}

ModuleResult run_distance(const Region& region, const std::string& cls,
                          const DataSources& sources) {
    ModuleResult res;
    double best = -1.0;
    if (sources.targets) {
        for (const auto& t : *sources.targets) {
            if (t.cls != cls) continue;
            const double d = geo::haversine_distance_km(region.centroid, t.location);
            if (best < 0.0 || d < best) best = d;
        }
    }
    if (best < 0.0) {
        res.warning = true;  // no targets of this class; sentence omitted
        return res;
    }
    res.values.emplace_back("km", best);
    return res;
}

ModuleResult run_plain(const RegionDataset& ds, const Region& region, const ModuleCall& call,
                       const DataSources& sources) {
    switch (call.family) {
        case ModuleFamily::get_area: return run_area(region);
        case ModuleFamily::get_night_light: return run_night_light(region, sources);
        case ModuleFamily::count_area: return run_count_area(region, call.class_arg, sources);
        case ModuleFamily::get_distance_to_nearest_target:
            return run_distance(region, call.class_arg, sources);
        default:
            throw ModuleError("unsupported module family in numeric dispatch: " +
                              call_display(call));
    }
    (void)ds;
}

// Aggregation over neighbors: "sum" values total across neighbors, all
// other value kinds (ratios, means, areas, distances) average unweighted.
ModuleResult run_neighbor(const RegionDataset& ds, const Region& region, const ModuleCall& call,
                          const DataSources& sources) {
    ModuleCall inner = call;
    inner.neighbor = false;

    auto adj = ds.adjacency.find(region.id);
    std::vector<ModuleResult> collected;
    if (adj != ds.adjacency.end()) {
        for (const auto& neighbor_id : adj->second) {
            ModuleResult r = run_plain(ds, ds.at(neighbor_id), inner, sources);
            if (!r.omitted()) collected.push_back(std::move(r));
        }
    }

    ModuleResult res;
    res.call = call;
    if (collected.empty()) {
        res.warning = true;
        for (const auto& name : value_names_for(inner.family)) {
            res.values.emplace_back(name, 0.0);
        }
        return res;
    }
    const auto& names = collected.front().values;
    for (std::size_t vi = 0; vi < names.size(); ++vi) {
        double acc = 0.0;
        for (const auto& r : collected) acc += r.values[vi].second;
        if (names[vi].first != "sum") acc /= static_cast<double>(collected.size());
        res.values.emplace_back(names[vi].first, acc);
    }
    return res;
}

std::string cache_file_stem(const ModuleCall& call) {
    std::string stem = call_id(call);
    for (char& c : stem) {
        if (c == ':') c = '.';
        if (c == '(') c = '-';
    }
    stem.erase(std::remove(stem.begin(), stem.end(), ')'), stem.end());
    return stem;
}

std::string call_fingerprint(const RegionDataset& ds, const ModuleCall& call,
                             const DataSources& sources) {
    Fnv1a h;
    h.add(ds.geometry_fingerprint());
    h.add(call_id(call));
    h.add(sources.source_version);
    return h.hex();
}

void append_result_rows(std::vector<csv::Row>& rows, const std::string& region_id,
                        const ModuleResult& res) {
    const std::string id = call_id(res.call);
    if (!res.numeric) {
        if (!res.text.empty()) rows.push_back({region_id, id, "address", res.text});
    } else {
        for (const auto& [name, value] : res.values) {
            rows.push_back({region_id, id, name, format_roundtrip(value)});
        }
    }
    // bookkeeping rows so reload preserves warning/omission state
    if (res.warning) rows.push_back({region_id, id, "__warning__", "1"});
}

struct ParsedRows {
    // region -> results keyed by call id
    std::map<std::string, std::map<std::string, ModuleResult>> data;
};

ParsedRows parse_result_rows(const std::vector<csv::Row>& rows, const std::string& path) {
    ParsedRows out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 4) {
            throw ParseError(path + ": row " + std::to_string(i + 1) + " must have 4 fields");
        }
        const auto call = call_from_id(row[1]);
        if (!call) throw ParseError(path + ": unknown call id \"" + row[1] + "\"");
        auto& res = out.data[row[0]][row[1]];
        res.call = *call;
        if (row[2] == "__warning__") {
            res.warning = true;
        } else if (row[2] == "address") {
            res.numeric = false;
            res.text = row[3];
        } else {
            res.values.emplace_back(row[2], std::stod(row[3]));
        }
        if (call->family == ModuleFamily::get_address) res.numeric = false;
    }
    return out;
}

}  // namespace

ModuleResult run_module(const RegionDataset& ds, const Region& region, const ModuleCall& call,
                        const DataSources& sources) {
    validate_call(call);
    ModuleResult res;
    if (call.neighbor) {
        res = run_neighbor(ds, region, call, sources);
    } else if (call.family == ModuleFamily::get_address) {
        res = run_address(region, sources, nullptr);
    } else {
        res = run_plain(ds, region, call, sources);
    }
    res.call = call;
    res.numeric = call.family != ModuleFamily::get_address;
    return res;
}

ModuleOutputTable extract_all(const RegionDataset& ds, const std::vector<ModuleCall>& calls,
                              const DataSources& sources, const std::string& cache_dir,
                              ExtractStats* stats) {
    for (const auto& call : calls) validate_call(call);
    const bool needs_adjacency =
        std::any_of(calls.begin(), calls.end(), [](const ModuleCall& c) { return c.neighbor; });
    if (needs_adjacency && ds.adjacency.size() != ds.regions.size()) {
        throw ValidationError("neighbor aggregation requires a built adjacency graph");
    }
    if (!cache_dir.empty()) fs::create_directories(cache_dir);

    ModuleOutputTable table;
    table.calls = calls;
    table.region_order = ds.region_ids();
    for (const auto& id : table.region_order) {
        table.per_region[id].resize(calls.size());
    }

    const auto n = static_cast<std::ptrdiff_t>(ds.regions.size());
    for (std::size_t ci = 0; ci < calls.size(); ++ci) {
        const ModuleCall& call = calls[ci];

        // warm cache?
        std::string cache_path, meta_path, fingerprint;
        if (!cache_dir.empty()) {
            const std::string stem = cache_file_stem(call);
            cache_path = (fs::path(cache_dir) / (stem + ".csv")).string();
            meta_path = (fs::path(cache_dir) / (stem + ".meta.json")).string();
            fingerprint = call_fingerprint(ds, call, sources);
            if (fs::exists(cache_path) && fs::exists(meta_path)) {
                std::ifstream meta_in(meta_path);
                nlohmann::json meta;
                meta_in >> meta;
                if (meta.value("fingerprint", "") == fingerprint) {
                    const auto parsed = parse_result_rows(csv::read_file(cache_path), cache_path);
                    bool complete = true;
                    for (const auto& region : ds.regions) {
                        auto rit = parsed.data.find(region.id);
                        if (rit == parsed.data.end() || !rit->second.count(call_id(call))) {
                            complete = false;
                            break;
                        }
                    }
                    if (complete) {
                        for (const auto& region : ds.regions) {
                            table.per_region[region.id][ci] =
                                parsed.data.at(region.id).at(call_id(call));
                        }
                        if (stats) stats->cache_hits += static_cast<long>(ds.regions.size());
                        continue;
                    }
                }
            }
        }

        std::vector<ModuleResult> results(ds.regions.size());
        std::vector<std::string> errors(ds.regions.size());
        if (call.family == ModuleFamily::get_address && !call.neighbor) {
            for (std::size_t i = 0; i < ds.regions.size(); ++i) {
                try {
                    results[i] = run_address(ds.regions[i], sources, stats);
                    results[i].call = call;
                    results[i].numeric = false;
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        } else {
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                try {
                    results[idx] = run_module(ds, ds.regions[idx], call, sources);
                } catch (const std::exception& e) {
                    errors[idx] = e.what();
                }
            }
        }

        std::vector<std::string> diagnostics;
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (!errors[i].empty()) {
                diagnostics.push_back(ds.regions[i].id + ": " + call_display(call) + ": " +
                                      errors[i]);
            }
        }
        if (!diagnostics.empty()) {
            if (stats) stats->diagnostics = diagnostics;
            std::string msg = "module extraction failed for " +
                              std::to_string(diagnostics.size()) + " region(s):";
            for (const auto& d : diagnostics) msg += "\n  " + d;
            throw ModuleError(msg);
        }

        for (std::size_t i = 0; i < ds.regions.size(); ++i) {
            table.per_region[ds.regions[i].id][ci] = results[i];
        }
        if (stats) stats->computed += static_cast<long>(ds.regions.size());

        if (!cache_dir.empty()) {
            // single writer; readers only touch finished files
            static std::mutex cache_mu;
            std::lock_guard lock(cache_mu);
            std::vector<csv::Row> rows{{"region_id", "call_id", "value_name", "value"}};
            for (const auto& region : ds.regions) {
                append_result_rows(rows, region.id, table.per_region[region.id][ci]);
            }
            csv::write_file(cache_path, rows);
            nlohmann::json meta;
            meta["fingerprint"] = fingerprint;
            meta["call"] = call_id(call);
            std::ofstream meta_out(meta_path);
            meta_out << meta.dump(2) << '\n';
        }
    }
    return table;
}

void save_module_table(const std::string& path, const ModuleOutputTable& table) {
    std::vector<csv::Row> rows{{"region_id", "call_id", "value_name", "value"}};
    for (const auto& region_id : table.region_order) {
        for (const auto& res : table.results_for(region_id)) {
            append_result_rows(rows, region_id, res);
        }
    }
    csv::write_file(path, rows);
}

ModuleOutputTable load_module_table(const std::string& path, const RegionDataset& ds) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != csv::Row{"region_id", "call_id", "value_name", "value"}) {
        throw ParseError(path + ": expected header region_id,call_id,value_name,value");
    }
    const auto parsed = parse_result_rows(rows, path);

    // call order: first appearance in the file
    std::vector<std::string> call_order;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (std::find(call_order.begin(), call_order.end(), rows[i][1]) == call_order.end()) {
            call_order.push_back(rows[i][1]);
        }
    }

    ModuleOutputTable table;
    table.region_order = ds.region_ids();
    for (const auto& cid : call_order) table.calls.push_back(*call_from_id(cid));
    for (const auto& region_id : table.region_order) {
        auto rit = parsed.data.find(region_id);
        if (rit == parsed.data.end()) {
            throw ParseError(path + ": no module outputs for region " + region_id);
        }
        auto& list = table.per_region[region_id];
        for (const auto& cid : call_order) {
            auto cit = rit->second.find(cid);
            if (cit == rit->second.end()) {
                throw ParseError(path + ": region " + region_id + " missing call " + cid);
            }
            list.push_back(cit->second);
        }
    }
    return table;
}

}  // namespace geoinfer
