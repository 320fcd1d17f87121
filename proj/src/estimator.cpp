#include "geoinfer/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "geoinfer/csv.hpp"
#include "geoinfer/errors.hpp"
#include "geoinfer/hash.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

namespace fs = std::filesystem;

SelectionMode selection_mode_from_name(const std::string& name) {
    if (name == "full") return SelectionMode::full;
    if (name == "no_coarse") return SelectionMode::no_coarse;
    if (name == "no_fine") return SelectionMode::no_fine;
    if (name == "random") return SelectionMode::random_pick;
    throw ConfigError("unknown selection mode: " + name);
}

std::string selection_mode_name(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::full: return "full";
        case SelectionMode::no_coarse: return "no_coarse";
        case SelectionMode::no_fine: return "no_fine";
        case SelectionMode::random_pick: return "random";
    }
    return "?";
}

EstimationConfig EstimationConfig::for_k(int k) {
    EstimationConfig c;
    c.n_coarse = c.n_fine = (k == 0 ? 5 : 3);
    return c;
}

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::init: return "init";
        case Provenance::loop: return "loop";
        case Provenance::ground_truth: return "ground_truth";
    }
    return "?";
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "init") return Provenance::init;
    if (name == "loop") return Provenance::loop;
    if (name == "ground_truth") return Provenance::ground_truth;
    throw ParseError("unknown provenance: " + name);
}

bool PseudoLabelStore::contains(const std::string& id) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const Entry& e) { return e.region_id == id; });
}

double PseudoLabelStore::value_of(const std::string& id) const {
    for (const auto& e : entries) {
        if (e.region_id == id) return e.value;
    }
    throw ValidationError("store has no entry for region " + id);
}

std::vector<std::pair<std::string, double>> PseudoLabelStore::values() const {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.emplace_back(e.region_id, e.value);
    return out;
}

std::vector<std::string> select_coarse(const std::vector<std::pair<std::string, double>>& store,
                                       int n_coarse) {
    if (store.empty() || n_coarse <= 0) return {};
    auto sorted = store;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    const auto s = static_cast<long>(sorted.size());
    std::vector<std::string> out;
    if (s <= n_coarse) {
        for (const auto& [id, v] : sorted) out.push_back(id);
        return out;
    }
    if (n_coarse == 1) return {sorted.front().first};
    for (int i = 0; i < n_coarse; ++i) {
        const double pos = static_cast<double>(i) * static_cast<double>(s - 1) /
                           static_cast<double>(n_coarse - 1);
        const auto rank = static_cast<long>(std::floor(pos + 0.5));  // half-up
        const std::string& id = sorted[static_cast<std::size_t>(rank)].first;
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

namespace {

// store ids ranked by similarity to the target, most similar first, ties by
// lexically smaller id
std::vector<std::string> fine_ranking(const std::vector<std::string>& store_ids,
                                      const FeatureMatrix& vectors,
                                      const std::string& target_id) {
    const auto& target = vectors.row(target_id);
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(store_ids.size());
    for (const auto& id : store_ids) {
        scored.emplace_back(similarity(vectors.row(id), target), id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (const auto& [sim, id] : scored) out.push_back(id);
    return out;
}

}  // namespace

std::vector<std::string> select_fine(const std::vector<std::string>& store_ids,
                                     const FeatureMatrix& vectors, const std::string& target_id,
                                     int n_fine) {
    if (n_fine <= 0) return {};
    auto ranked = fine_ranking(store_ids, vectors, target_id);
    if (static_cast<int>(ranked.size()) > n_fine) {
        ranked.resize(static_cast<std::size_t>(n_fine));
    }
    return ranked;
}

DemonstrationPick select_demonstrations(
    const std::vector<std::pair<std::string, double>>& store, const FeatureMatrix& vectors,
    const std::string& target_id, const EstimationConfig& config, Rng& rng) {
    DemonstrationPick pick;
    const auto s = static_cast<int>(store.size());
    const int total = std::min(config.n_coarse + config.n_fine, s);
    pick.requested = total;
    if (total <= 0) return pick;

    std::vector<std::string> store_ids;
    store_ids.reserve(store.size());
    for (const auto& [id, v] : store) store_ids.push_back(id);

    switch (config.selection_mode) {
        case SelectionMode::random_pick: {
            for (std::size_t idx :
                 rng.sample_without_replacement(store.size(), static_cast<std::size_t>(total))) {
                pick.ids.push_back(store[idx].first);
            }
            return pick;
        }
        case SelectionMode::no_coarse:
            pick.fine_rank = fine_ranking(store_ids, vectors, target_id);
            pick.ids.assign(pick.fine_rank.begin(), pick.fine_rank.begin() + total);
            return pick;
        case SelectionMode::no_fine:
            pick.ids = select_coarse(store, total);
            pick.coarse_ids = pick.ids;
            return pick;
        case SelectionMode::full:
            break;
    }

    pick.coarse_ids = select_coarse(store, config.n_coarse);
    pick.fine_rank = fine_ranking(store_ids, vectors, target_id);
    pick.ids = pick.coarse_ids;
    auto add_unique = [&](const std::string& id) {
        if (std::find(pick.ids.begin(), pick.ids.end(), id) == pick.ids.end()) {
            pick.ids.push_back(id);
            return true;
        }
        return false;
    };
    int added = 0;
    for (const auto& id : pick.fine_rank) {
        if (added >= config.n_fine) break;
        if (add_unique(id)) ++added;
    }
    // dedup-then-backfill: overlaps free up budget for the next most
    // similar candidates
    for (const auto& id : pick.fine_rank) {
        if (static_cast<int>(pick.ids.size()) >= total) break;
        add_unique(id);
    }
    return pick;
}

namespace {

struct DemoMember {
    std::string region_id;
    double label;
    bool labeled;  // ground-truth split member
    bool coarse;
};

std::vector<Demonstration> to_demonstrations(
    std::vector<DemoMember> members, const std::map<std::string, std::string>& paragraphs) {
    // prompt order: labeled examples first, then pseudo demos, each block
    // ascending by (label, id)
    std::stable_sort(members.begin(), members.end(), [](const DemoMember& a, const DemoMember& b) {
        if (a.labeled != b.labeled) return a.labeled;
        if (a.label != b.label) return a.label < b.label;
        return a.region_id < b.region_id;
    });
    std::vector<Demonstration> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back({paragraphs.at(m.region_id), m.label});
    return out;
}

class PromptAssembler {
public:
    PromptAssembler(const PromptTemplateSet& templates, const std::string& indicator_phrase,
                    std::size_t budget)
        : templates_(templates), indicator_phrase_(indicator_phrase), budget_(budget) {}

    // Builds the prompt, trimming pseudo demos when over budget: fine picks
    // go first (least similar first), then coarse picks middle-out so the
    // distribution extremes survive. Labeled demos are never trimmed.
    std::string build(const std::string& target_paragraph, std::vector<DemoMember> members,
                      const DemonstrationPick& pick,
                      const std::map<std::string, std::string>& paragraphs, long* trimmed) {
        auto render = [&](const std::vector<DemoMember>& ms) {
            return build_estimation_prompt(target_paragraph, to_demonstrations(ms, paragraphs),
                                           indicator_phrase_, templates_);
        };
        std::string prompt = render(members);
        if (budget_ == 0 || prompt.size() <= budget_) return prompt;

        // least similar fine members first
        std::vector<std::string> drop_order;
        for (auto it = pick.fine_rank.rbegin(); it != pick.fine_rank.rend(); ++it) {
            if (std::find(pick.coarse_ids.begin(), pick.coarse_ids.end(), *it) ==
                pick.coarse_ids.end()) {
                drop_order.push_back(*it);
            }
        }
        for (const auto& id : drop_order) {
            if (prompt.size() <= budget_) break;
            if (remove_member(members, id)) {
                if (trimmed) ++*trimmed;
                prompt = render(members);
            }
        }
        // coarse middle-out
        while (prompt.size() > budget_) {
            std::vector<std::size_t> coarse_positions;
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (!members[i].labeled && members[i].coarse) coarse_positions.push_back(i);
            }
            if (coarse_positions.size() <= 2) break;  // keep the extremes
            std::vector<std::size_t> by_label = coarse_positions;
            std::sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) {
                return members[a].label < members[b].label;
            });
            const std::size_t mid = by_label[by_label.size() / 2];
            members.erase(members.begin() + static_cast<std::ptrdiff_t>(mid));
            if (trimmed) ++*trimmed;
            prompt = render(members);
        }
        return prompt;
    }

private:
    static bool remove_member(std::vector<DemoMember>& members, const std::string& id) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (!members[i].labeled && members[i].region_id == id) {
                members.erase(members.begin() + static_cast<std::ptrdiff_t>(i));
                return true;
            }
        }
        return false;
    }

    const PromptTemplateSet& templates_;
    std::string indicator_phrase_;
    std::size_t budget_;
};

struct LoopState {
    PseudoLabelStore store;
    std::vector<std::string> remaining;
    std::vector<std::string> requeued;
    long iterations = 0;
    long consumed = 0;
    Rng rng{0, 2};
};

std::string config_hash(const EstimationConfig& config, const EstimationInputs& in) {
    Fnv1a h;
    h.add(static_cast<std::uint64_t>(config.seed));
    h.add(config.n_coarse);
    h.add(config.n_fine);
    h.add(config.init_queries);
    h.add(selection_mode_name(config.selection_mode));
    h.add(config.temperature);
    h.add(config.indicator_phrase);
    h.add(in.dataset.geometry_fingerprint());
    h.add(in.split.k);
    for (const auto& [id, v] : in.split.labeled) {
        h.add(id);
        h.add(v);
    }
    return h.hex();
}

void write_checkpoint(const std::string& path, const std::string& hash, const LoopState& st) {
    nlohmann::json j;
    j["config_hash"] = hash;
    j["rng_state"] = st.rng.state_string();
    j["iterations"] = st.iterations;
    j["consumed"] = st.consumed;
    j["remaining"] = st.remaining;
    j["requeued"] = st.requeued;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : st.store.entries) {
        entries.push_back({{"id", e.region_id},
                           {"value", e.value},
                           {"provenance", provenance_name(e.provenance)}});
    }
    j["store"] = entries;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(1) << '\n';
    }
    fs::rename(tmp, path);  // atomic on POSIX
}

bool read_checkpoint(const std::string& path, const std::string& hash, LoopState& st) {
    std::ifstream in(path);
    if (!in) return false;
    nlohmann::json j;
    in >> j;
    if (j.value("config_hash", "") != hash) {
        throw ConfigError("checkpoint " + path + " was written under a different configuration");
    }
    st.rng.set_state(j.at("rng_state").get<std::string>());
    st.iterations = j.value("iterations", 0L);
    st.consumed = j.value("consumed", 0L);
    st.remaining = j.value("remaining", std::vector<std::string>{});
    st.requeued = j.value("requeued", std::vector<std::string>{});
    st.store.entries.clear();
    for (const auto& e : j.at("store")) {
        st.store.entries.push_back({e.at("id").get<std::string>(), e.at("value").get<double>(),
                                    provenance_from_name(e.at("provenance").get<std::string>())});
    }
    return true;
}

std::map<std::string, std::string> serialize_all(const RegionDataset& ds,
                                                 const ModuleOutputTable& table,
                                                 const PromptTemplateSet& templates) {
    std::map<std::string, std::string> out;
    for (const auto& id : table.region_order) {
        out[id] = serialize_region(table.results_for(id), templates);
    }
    (void)ds;
    return out;
}

}  // namespace

PseudoLabelStore estimate_all(const EstimationInputs& in, const EstimationConfig& config,
                              EstimationTrace* trace) {
    const auto paragraphs = serialize_all(in.dataset, in.table, in.templates);

    std::vector<DemoMember> labeled_members;
    for (const auto& [id, value] : in.split.labeled) {
        labeled_members.push_back({id, value, true, false});
    }

    const std::string hash = config_hash(config, in);
    LoopState st;
    st.rng = Rng(config.seed, 2);
    st.remaining = in.split.unlabeled;
    bool resumed = false;
    if (config.resume && !config.checkpoint_path.empty()) {
        resumed = read_checkpoint(config.checkpoint_path, hash, st);
        if (resumed) in.backend.skip_completions(static_cast<std::size_t>(st.consumed));
    }

    PromptAssembler assembler(in.templates, config.indicator_phrase,
                              in.backend.max_prompt_chars());
    EstimationTrace local_trace;
    EstimationTrace* tr = trace ? trace : &local_trace;
    if (resumed) tr->iterations = st.iterations;

    auto checkpoint = [&] {
        if (!config.checkpoint_path.empty()) {
            write_checkpoint(config.checkpoint_path, hash, st);
        }
    };

    auto run_query = [&](const std::string& prompt, int n) {
        CompletionRequest req;
        req.prompt = prompt;
        req.temperature = config.temperature;
        req.top_p = config.top_p;
        req.n_samples = n;
        req.max_tokens = config.max_tokens;
        try {
            auto responses = in.backend.complete(req);
            st.consumed += n;
            tr->completions_consumed = st.consumed;
            return responses;
        } catch (const TransportError&) {
            checkpoint();  // resumable
            throw;
        }
    };

    // single estimation with up to 2 re-queries at the same temperature
    auto estimate_once = [&](const std::string& prompt) -> std::optional<double> {
        for (int attempt = 0; attempt < 3; ++attempt) {
            const auto responses = run_query(prompt, 1);
            if (auto v = parse_numeric_answer(responses[0])) return v;
            ++tr->parse_retries;
        }
        return std::nullopt;
    };

    auto build_prompt = [&](const std::string& target_id) {
        std::vector<DemoMember> members = labeled_members;
        DemonstrationPick pick;
        if (!st.store.entries.empty()) {
            pick = select_demonstrations(st.store.values(), in.vectors, target_id, config,
                                         st.rng);
            for (const auto& id : pick.ids) {
                const bool coarse = std::find(pick.coarse_ids.begin(), pick.coarse_ids.end(),
                                              id) != pick.coarse_ids.end();
                members.push_back({id, st.store.value_of(id), false, coarse});
            }
        }
        return assembler.build(paragraphs.at(target_id), std::move(members), pick, paragraphs,
                               &tr->trimmed_demos);
    };

    auto insert = [&](const std::string& id, double value, Provenance provenance) {
        st.store.entries.push_back({id, value, provenance});
        ++st.iterations;
        tr->iterations = st.iterations;
        checkpoint();
    };

    auto take_random = [&](std::vector<std::string>& pool) {
        const auto idx = static_cast<std::size_t>(st.rng.below(pool.size()));
        std::string id = pool[idx];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
        return id;
    };

    while (!st.remaining.empty()) {
        if (config.max_iterations >= 0 && st.iterations >= config.max_iterations) {
            checkpoint();
            return st.store;  // partial run for harness use
        }

        if (st.store.entries.empty()) {
            // first region: init_queries completions averaged
            const std::string target = take_random(st.remaining);
            const std::string prompt = build_prompt(target);
            std::vector<double> parsed;
            for (const auto& response : run_query(prompt, config.init_queries)) {
                if (auto v = parse_numeric_answer(response)) parsed.push_back(*v);
            }
            if (parsed.empty()) {
                for (int attempt = 0; attempt < 2 && parsed.empty(); ++attempt) {
                    ++tr->parse_retries;
                    const auto responses = run_query(prompt, 1);
                    if (auto v = parse_numeric_answer(responses[0])) parsed.push_back(*v);
                }
            }
            if (parsed.empty()) {
                checkpoint();
                throw ParseError("init estimation for region " + target +
                                 " produced no parseable value");
            }
            double sum = 0.0;
            for (double v : parsed) sum += v;
            insert(target, sum / static_cast<double>(parsed.size()), Provenance::init);
            continue;
        }

        const std::string target = take_random(st.remaining);
        const std::string prompt = build_prompt(target);
        if (auto value = estimate_once(prompt)) {
            insert(target, *value, Provenance::loop);
        } else {
            st.requeued.push_back(target);
            ++tr->requeued;
            checkpoint();
        }
    }

    // one requeue pass for regions whose answers never parsed
    auto requeued = st.requeued;
    st.requeued.clear();
    for (const auto& target : requeued) {
        const std::string prompt = build_prompt(target);
        if (auto value = estimate_once(prompt)) {
            insert(target, *value, Provenance::loop);
        } else {
            checkpoint();
            throw ParseError("estimation for region " + target +
                             " failed to produce a numeric answer after requeue");
        }
    }
    return st.store;
}

PseudoLabelStore estimate_transfer(const RegionDataset& target_ds,
                                   const ModuleOutputTable& target_table,
                                   const RegionDataset& source_ds,
                                   const ModuleOutputTable& source_table,
                                   const LabelTable& source_labels, Backend& backend,
                                   const PromptTemplateSet& templates,
                                   const EstimationConfig& config, EstimationTrace* trace) {
    const auto source_raw = raw_feature_matrix(source_table);
    const auto target_raw = raw_feature_matrix(target_table);
    const auto dims = shared_dims(source_raw, target_raw);
    if (dims.empty()) {
        throw ValidationError("transfer: source and target share no feature dimensions");
    }
    const auto source_restricted = restrict_dims(source_raw, dims);
    const auto target_restricted = restrict_dims(target_raw, dims);

    // joint normalization over source + target rows; ids prefixed to avoid
    // collisions between countries
    FeatureMatrix joint_raw;
    joint_raw.dim_names = dims;
    for (const auto& [id, row] : source_restricted.rows) joint_raw.rows["s/" + id] = row;
    for (const auto& [id, row] : target_restricted.rows) joint_raw.rows["t/" + id] = row;
    const auto joint = zscore(joint_raw);

    std::map<std::string, std::string> paragraphs;  // keyed by prefixed id
    for (const auto& id : source_table.region_order) {
        paragraphs["s/" + id] = serialize_region(source_table.results_for(id), templates);
    }
    for (const auto& id : target_table.region_order) {
        paragraphs["t/" + id] = serialize_region(target_table.results_for(id), templates);
    }

    // source pool: labeled source regions in dataset order
    std::vector<std::pair<std::string, double>> pool;
    for (const auto& region : source_ds.regions) {
        auto it = source_labels.values.find(region.id);
        if (it != source_labels.values.end()) pool.emplace_back("s/" + region.id, it->second);
    }
    if (pool.empty()) throw ValidationError("transfer: source pool has no labeled regions");

    EstimationTrace local_trace;
    EstimationTrace* tr = trace ? trace : &local_trace;
    Rng rng(config.seed, 2);
    PromptAssembler assembler(templates, config.indicator_phrase, backend.max_prompt_chars());

    auto run_query = [&](const std::string& prompt) {
        CompletionRequest req;
        req.prompt = prompt;
        req.temperature = config.temperature;
        req.top_p = config.top_p;
        req.n_samples = 1;
        req.max_tokens = config.max_tokens;
        auto responses = backend.complete(req);
        ++tr->completions_consumed;
        return responses[0];
    };

    PseudoLabelStore store;
    for (const auto& region : target_ds.regions) {
        const auto pick =
            select_demonstrations(pool, joint, "t/" + region.id, config, rng);
        std::vector<DemoMember> members;
        for (const auto& id : pick.ids) {
            double label = 0.0;
            for (const auto& [pid, v] : pool) {
                if (pid == id) {
                    label = v;
                    break;
                }
            }
            const bool coarse = std::find(pick.coarse_ids.begin(), pick.coarse_ids.end(), id) !=
                                pick.coarse_ids.end();
            members.push_back({id, label, false, coarse});
        }
        const std::string prompt =
            assembler.build(paragraphs.at("t/" + region.id), std::move(members), pick,
                            paragraphs, &tr->trimmed_demos);
        std::optional<double> value;
        for (int attempt = 0; attempt < 3 && !value; ++attempt) {
            if (attempt > 0) ++tr->parse_retries;
            value = parse_numeric_answer(run_query(prompt));
        }
        if (!value) {
            throw ParseError("transfer estimation for region " + region.id +
                             " produced no parseable value");
        }
        store.entries.push_back({region.id, *value, Provenance::loop});
        ++tr->iterations;
    }
    return store;
}

void save_predictions(const std::string& path, const PseudoLabelStore& store,
                      const KShotSplit* split, const std::string& indicator) {
    std::vector<csv::Row> rows{{"region_id", "indicator", "prediction", "provenance"}};
    for (const auto& e : store.entries) {
        rows.push_back({e.region_id, indicator, format_roundtrip(e.value),
                        provenance_name(e.provenance)});
    }
    if (split) {
        for (const auto& [id, value] : split->labeled) {
            rows.push_back({id, indicator, format_roundtrip(value),
                            provenance_name(Provenance::ground_truth)});
        }
    }
    csv::write_file(path, rows);
}

PseudoLabelStore load_predictions(const std::string& path, std::string* indicator) {
    const auto rows = csv::read_file(path);
    if (rows.empty() ||
        rows[0] != csv::Row{"region_id", "indicator", "prediction", "provenance"}) {
        throw ParseError(path + ": expected header region_id,indicator,prediction,provenance");
    }
    PseudoLabelStore store;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 4) throw ParseError(path + ": malformed row " + std::to_string(i + 1));
        if (indicator && i == 1) *indicator = row[1];
        store.entries.push_back({row[0], std::stod(row[2]), provenance_from_name(row[3])});
    }
    return store;
}

}  // namespace geoinfer
