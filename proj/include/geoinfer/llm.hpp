#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoinfer/module_call.hpp"

namespace geoinfer {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.5;
    double top_p = 1.0;
    int n_samples = 1;
    int max_tokens = 64;
};

// Pluggable completion backend. Implementations must return exactly
// n_samples responses or throw TransportError.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;
    virtual std::string kind() const = 0;

    // Fast-forward past completions already consumed before a checkpoint;
    // only stateful backends need it.
    virtual void skip_completions(std::size_t) {}

    // 0 = unlimited. The estimator trims demonstrations to fit.
    virtual std::size_t max_prompt_chars() const { return 0; }
};

// Replays a fixed response list in order; errors when exhausted. Test
// harness use; single consumer.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::vector<std::string> complete(const CompletionRequest& request) override;
    std::string kind() const override { return "scripted"; }
    void skip_completions(std::size_t n) override { cursor_ += n; }
    std::size_t consumed() const { return cursor_; }

private:
    std::vector<std::string> responses_;
    std::size_t cursor_ = 0;
};

// Answers an estimation prompt with w.v + b where v collects the numeric
// tokens of the target paragraph in order. Pure function of its parameters.
class LinearOracleBackend : public Backend {
public:
    LinearOracleBackend(std::vector<double> weights, double bias)
        : weights_(std::move(weights)), bias_(bias) {}

    std::vector<std::string> complete(const CompletionRequest& request) override;
    std::string kind() const override { return "linear_oracle"; }

private:
    std::vector<double> weights_;
    double bias_;
};

// Answers with the mean label of the k in-context demonstrations whose
// paragraphs share the most tokens with the target paragraph. Models a
// backend that actually reads the demonstrations, so demonstration-selection
// strategies become observable in tests.
class KnnOracleBackend : public Backend {
public:
    explicit KnnOracleBackend(int k = 3, double default_value = 0.0)
        : k_(k), default_value_(default_value) {}

    std::vector<std::string> complete(const CompletionRequest& request) override;
    std::string kind() const override { return "knn_oracle"; }

private:
    int k_;
    double default_value_;
};

struct ParsedModuleList {
    std::vector<ModuleCall> calls;       // deduplicated, first-mention order
    std::vector<std::string> warnings;   // skipped/unknown entries
};

// Scans the numbered lines of a selection response. Recognizes the six
// family names, quoted or bare class arguments, and the lambda form inside
// get_aggregate_neighbor_info.
ParsedModuleList parse_module_list(const std::string& text);

// First parseable decimal/scientific token, preferring text after the last
// "Answer:" marker; commas, currency signs and percent signs are stripped.
std::optional<double> parse_numeric_answer(const std::string& text);

// Split an estimation prompt into its blank-line-separated blocks; helper
// shared by the oracle backends.
struct PromptBlock {
    std::string paragraph;
    std::optional<double> label;  // absent for the target block
};
std::vector<PromptBlock> split_estimation_prompt(const std::string& prompt);

// Builds scripted/oracle backends from a config document; http_chat configs
// are routed to make_http_chat_backend.
std::unique_ptr<Backend> make_backend(const nlohmann::json& config);
std::unique_ptr<Backend> load_backend(const std::string& config_path);

}  // namespace geoinfer
