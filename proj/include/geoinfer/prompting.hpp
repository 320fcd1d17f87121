#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geoinfer/llm.hpp"
#include "geoinfer/module_call.hpp"
#include "geoinfer/modules.hpp"

namespace geoinfer {

// Sentence stems are keyed "family.value_name" with an optional "neighbor."
// prefix; a missing neighbor key falls back to the base stem plus
// " in the neighboring region(s)". Stems may contain {class}. A sentence is
// always "<stem> is <value>.".
//
// The defaults reproduce the reference prompt wording verbatim, including
// its quirks ("Format for reseponse:", "Infer a the ...", "(km$^2$)");
// golden tests pin those bytes. Overrides can swap in corrected phrasing.
struct PromptTemplateSet {
    std::string selection_template;   // slots: {module_catalog}, {task_question}
    std::string question_template;    // slots: {indicator_phrase}, {country}
    std::string instruction_template; // slot: {indicator_phrase}
    std::string answer_prefix;        // "Answer:"
    std::vector<std::string> module_catalog;          // one entry per family
    std::map<std::string, std::string> sentence_stems;

    static PromptTemplateSet defaults();

    // JSON document overriding any field; sentence stem keys live under
    // "sentence_stems".
    void apply_overrides_file(const std::string& path);

    std::string stem_for(const ModuleCall& call, const std::string& value_name) const;
};

std::string build_selection_prompt(const std::string& indicator_phrase,
                                   const std::string& country,
                                   const PromptTemplateSet& templates);

struct SelectionResult {
    std::map<std::string, int> votes;  // call id -> mentions across responses
    std::vector<ModuleCall> selected;
    int iterations = 10;
    int threshold = 5;
    std::vector<std::string> raw_responses;
    std::vector<std::string> warnings;
};

// Self-consistency voting: `iterations` completions at the given
// temperature, one vote per call per response (set semantics), keep calls
// mentioned at least `threshold` times. Throws when `threshold` or more
// responses yield no recognizable module.
SelectionResult select_modules(Backend& backend, const std::string& prompt, int iterations = 10,
                               int threshold = 5, double temperature = 0.5);

void save_selection(const std::string& path, const SelectionResult& result,
                    const std::string& country, const std::string& indicator);
SelectionResult load_selection(const std::string& path);

// "f1 is r1. f2 is r2. ..." in table order; results flagged warning with no
// payload are skipped. Missing stems raise ConfigError.
std::string serialize_region(const std::vector<ModuleResult>& results,
                             const PromptTemplateSet& templates);

struct Demonstration {
    std::string paragraph;
    double label = 0.0;
};

// Demonstration blocks then the target block, separated by blank lines;
// each block is paragraph, instruction, "Answer:" (+ one-decimal label for
// demonstrations).
std::string build_estimation_prompt(const std::string& target_paragraph,
                                    const std::vector<Demonstration>& demonstrations,
                                    const std::string& indicator_phrase,
                                    const PromptTemplateSet& templates);

}  // namespace geoinfer
