#include "geoinfer/prompting.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "geoinfer/errors.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

namespace {

std::string replace_all(std::string text, const std::string& slot, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
    return text;
}

constexpr const char* kSelectionSkeleton =
    "Given a modular set, determine the sequence of modules that can be executed with inputs to "
    "solve the question given following the format below.\n"
    "\n"
    "Format for reseponse:\n"
    "1. MODULE 1\n"
    "2. MODULE 2\n"
    "...\n"
    "\n"
    "The modules are defined as follows:\n"
    "{module_catalog}\n"
    "\n"
    "Question: {task_question}\n"
    "Input:\n"
    "- Location of the region - [Loc]\n"
    "\n"
    "Answer:";

const std::vector<std::string> kDefaultCatalog = {
    "- count_area(Loc, Class): Count the pixels of the given class in the location image. Class "
    "should be one of the element in [\"bareland\", \"rangeland\", \"development\", \"road\", "
    "\"tree\", \"water\", \"agricultural\", \"building\"].",
    "- get_address(Loc): Get address of given location.",
    "- get_area(Loc): Get area size of given location's region.",
    "- get_night_light(Loc): Get nightlight intensity of given location.",
    "- get_distance_to_nearest_target(Loc, Class): Get distance of given location to class. Class "
    "should be one of the element in ['airport', 'port']",
    "- get_aggregate_neighbor_info(Loc, Func): Get neighbor regions' information of given "
    "location, using functions defined above. The format of Func would be the lambda function "
    "(i.e., lambda x: [function name](loc=x, ...)).",
};

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
    PromptTemplateSet t;
    t.selection_template = kSelectionSkeleton;
    t.question_template =
        "Which information is useful to infer the {indicator_phrase} of {country}?";
    t.instruction_template =
        "Infer a the {indicator_phrase} from given location's description. Answer the numeric "
        "score only.";
    t.answer_prefix = "Answer:";
    t.module_catalog = kDefaultCatalog;
    t.sentence_stems = {
        {"get_address.address", "full address of the given location"},
        {"get_area.km2", "area of region (km$^2$) of the given location"},
        {"get_night_light.sum", "Sum of nightlight intensity"},
        {"get_night_light.mean", "Average nightlight intensity"},
        {"count_area.ratio", "Land cover ratio of {class}"},
        {"get_distance_to_nearest_target.km",
         "distance to the nearest {class} (km) of the given location"},
    };
    return t;
}

void PromptTemplateSet::apply_overrides_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open templates file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (j.contains("selection_template")) selection_template = j["selection_template"];
    if (j.contains("question_template")) question_template = j["question_template"];
    if (j.contains("instruction_template")) instruction_template = j["instruction_template"];
    if (j.contains("answer_prefix")) answer_prefix = j["answer_prefix"];
    if (j.contains("module_catalog")) {
        module_catalog.clear();
        for (const auto& entry : j["module_catalog"]) {
            module_catalog.push_back(entry.get<std::string>());
        }
    }
    if (j.contains("sentence_stems")) {
        for (auto it = j["sentence_stems"].begin(); it != j["sentence_stems"].end(); ++it) {
            sentence_stems[it.key()] = it.value().get<std::string>();
        }
    }
}

std::string PromptTemplateSet::stem_for(const ModuleCall& call,
                                        const std::string& value_name) const {
    const std::string base_key = family_name(call.family) + "." + value_name;
    std::string stem;
    if (call.neighbor) {
        auto it = sentence_stems.find("neighbor." + base_key);
        if (it != sentence_stems.end()) {
            stem = it->second;
        } else {
            auto base = sentence_stems.find(base_key);
            if (base == sentence_stems.end()) {
                throw ConfigError("no sentence template for " + base_key);
            }
            stem = base->second + " in the neighboring region(s)";
        }
    } else {
        auto it = sentence_stems.find(base_key);
        if (it == sentence_stems.end()) {
            throw ConfigError("no sentence template for " + base_key);
        }
        stem = it->second;
    }
    return replace_all(std::move(stem), "{class}", call.class_arg);
}

std::string build_selection_prompt(const std::string& indicator_phrase,
                                   const std::string& country,
                                   const PromptTemplateSet& templates) {
    if (templates.module_catalog.empty()) {
        throw ValidationError("module catalog is empty");
    }
    std::string catalog;
    for (std::size_t i = 0; i < templates.module_catalog.size(); ++i) {
        if (i) catalog += "\n\n";
        catalog += templates.module_catalog[i];
    }
    std::string question = replace_all(templates.question_template, "{indicator_phrase}",
                                       indicator_phrase);
    question = replace_all(std::move(question), "{country}", country);

    std::string prompt = replace_all(templates.selection_template, "{module_catalog}", catalog);
    return replace_all(std::move(prompt), "{task_question}", question);
}

SelectionResult select_modules(Backend& backend, const std::string& prompt, int iterations,
                               int threshold, double temperature) {
    CompletionRequest request;
    request.prompt = prompt;
    request.temperature = temperature;
    request.top_p = 1.0;
    request.n_samples = iterations;
    request.max_tokens = 512;

    SelectionResult result;
    result.iterations = iterations;
    result.threshold = threshold;
    result.raw_responses = backend.complete(request);

    int unparseable = 0;
    std::map<ModuleCall, int> votes;
    for (const auto& response : result.raw_responses) {
        const auto parsed = parse_module_list(response);
        for (const auto& w : parsed.warnings) result.warnings.push_back(w);
        if (parsed.calls.empty()) {
            ++unparseable;
            continue;
        }
        for (const auto& call : parsed.calls) votes[call] += 1;
    }
    if (unparseable >= threshold) {
        throw ParseError("module selection failed: " + std::to_string(unparseable) + " of " +
                         std::to_string(iterations) + " responses had no recognizable module");
    }

    for (const auto& [call, count] : votes) {
        result.votes[call_id(call)] = count;
        if (count >= threshold) result.selected.push_back(call);
    }
    std::sort(result.selected.begin(), result.selected.end());
    return result;
}

void save_selection(const std::string& path, const SelectionResult& result,
                    const std::string& country, const std::string& indicator) {
    nlohmann::json j;
    j["country"] = country;
    j["indicator"] = indicator;
    j["iterations"] = result.iterations;
    j["threshold"] = result.threshold;
    j["votes"] = result.votes;
    j["selected"] = nlohmann::json::array();
    for (const auto& call : result.selected) j["selected"].push_back(call_id(call));
    j["raw_responses"] = result.raw_responses;
    j["warnings"] = result.warnings;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write selection file: " + path);
    out << j.dump(2) << '\n';
}

SelectionResult load_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open selection file: " + path);
    nlohmann::json j;
    in >> j;
    SelectionResult result;
    result.iterations = j.value("iterations", 10);
    result.threshold = j.value("threshold", 5);
    if (j.contains("votes")) {
        for (auto it = j["votes"].begin(); it != j["votes"].end(); ++it) {
            result.votes[it.key()] = it.value().get<int>();
        }
    }
    for (const auto& cid : j.value("selected", nlohmann::json::array())) {
        auto call = call_from_id(cid.get<std::string>());
        if (!call) throw ParseError(path + ": bad call id \"" + cid.get<std::string>() + "\"");
        result.selected.push_back(*call);
    }
    for (const auto& r : j.value("raw_responses", nlohmann::json::array())) {
        result.raw_responses.push_back(r.get<std::string>());
    }
    return result;
}

std::string serialize_region(const std::vector<ModuleResult>& results,
                             const PromptTemplateSet& templates) {
    std::vector<std::string> sentences;
    for (const auto& res : results) {
        if (res.omitted()) continue;  // warned-and-empty results drop their sentence
        if (!res.numeric) {
            sentences.push_back(templates.stem_for(res.call, "address") + " is " + res.text +
                                ".");
            continue;
        }
        for (const auto& [name, value] : res.values) {
            sentences.push_back(templates.stem_for(res.call, name) + " is " +
                                format_value(value) + ".");
        }
    }
    std::string paragraph;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) paragraph += " ";
        paragraph += sentences[i];
    }
    return paragraph;
}

std::string build_estimation_prompt(const std::string& target_paragraph,
                                    const std::vector<Demonstration>& demonstrations,
                                    const std::string& indicator_phrase,
                                    const PromptTemplateSet& templates) {
    const std::string instruction =
        replace_all(templates.instruction_template, "{indicator_phrase}", indicator_phrase);

    std::string prompt;
    for (const auto& demo : demonstrations) {
        prompt += demo.paragraph + "\n" + instruction + "\n" + templates.answer_prefix + " " +
                  format_label(demo.label) + "\n\n";
    }
    prompt += target_paragraph + "\n" + instruction + "\n" + templates.answer_prefix;
    return prompt;
}

}  // namespace geoinfer
