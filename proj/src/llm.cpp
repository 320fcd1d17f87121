#include "geoinfer/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "geoinfer/errors.hpp"
#include "geoinfer/http_client.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

std::vector<std::string> ScriptedBackend::complete(const CompletionRequest& request) {
    if (request.n_samples < 1) throw ValidationError("n_samples must be >= 1");
    if (cursor_ + static_cast<std::size_t>(request.n_samples) > responses_.size()) {
        throw TransportError("scripted backend exhausted after " + std::to_string(cursor_) +
                             " responses");
    }
    std::vector<std::string> out(responses_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 responses_.begin() +
                                     static_cast<std::ptrdiff_t>(cursor_ + request.n_samples));
    cursor_ += static_cast<std::size_t>(request.n_samples);
    return out;
}

namespace {

bool parse_full_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

// Numeric tokens of a paragraph, in order. A token qualifies when, after
// stripping wrapping punctuation, strtod consumes it entirely; this skips
// things like "(km$^2$)" and trailing sentence periods.
std::vector<double> paragraph_numbers(const std::string& paragraph) {
    std::vector<double> out;
    std::istringstream is(paragraph);
    std::string token;
    while (is >> token) {
        std::size_t b = 0, e = token.size();
        while (b < e && (token[b] == '(' || token[b] == '$' || token[b] == '"')) ++b;
        while (e > b && (token[e - 1] == '.' || token[e - 1] == ',' || token[e - 1] == ')' ||
                         token[e - 1] == ';' || token[e - 1] == '"' || token[e - 1] == '%')) {
            --e;
        }
        double v;
        if (parse_full_double(token.substr(b, e - b), v)) out.push_back(v);
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream is(text);
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
}

std::set<std::string> token_set(const std::string& text) {
    std::set<std::string> out;
    std::istringstream is(text);
    std::string token;
    while (is >> token) out.insert(token);
    return out;
}

}  // namespace

std::vector<PromptBlock> split_estimation_prompt(const std::string& prompt) {
    std::vector<PromptBlock> blocks;
    std::string block;
    auto flush = [&] {
        if (block.empty()) return;
        PromptBlock b;
        const auto lines = split_lines(block);
        if (!lines.empty()) b.paragraph = lines.front();
        for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
            const auto pos = it->rfind("Answer:", 0);
            if (pos == 0) {
                const std::string rest = it->substr(7);
                double v;
                std::string trimmed;
                std::istringstream(rest) >> trimmed;
                if (parse_full_double(trimmed, v)) b.label = v;
                break;
            }
        }
        blocks.push_back(std::move(b));
        block.clear();
    };
    std::string line;
    std::istringstream is(prompt);
    while (std::getline(is, line)) {
        if (line.empty()) {
            flush();
        } else {
            if (!block.empty()) block += '\n';
            block += line;
        }
    }
    flush();
    return blocks;
}

std::vector<std::string> LinearOracleBackend::complete(const CompletionRequest& request) {
    const auto blocks = split_estimation_prompt(request.prompt);
    if (blocks.empty()) throw ValidationError("linear_oracle: empty prompt");
    const auto values = paragraph_numbers(blocks.back().paragraph);
    if (values.size() != weights_.size()) {
        throw ValidationError("linear_oracle: paragraph has " + std::to_string(values.size()) +
                              " numeric values, expected " + std::to_string(weights_.size()));
    }
    double y = bias_;
    for (std::size_t i = 0; i < values.size(); ++i) y += weights_[i] * values[i];
    std::vector<std::string> out;
    out.assign(static_cast<std::size_t>(request.n_samples), "Answer: " + format_roundtrip(y));
    return out;
}

std::vector<std::string> KnnOracleBackend::complete(const CompletionRequest& request) {
    const auto blocks = split_estimation_prompt(request.prompt);
    if (blocks.empty()) throw ValidationError("knn_oracle: empty prompt");

    const auto target_tokens = token_set(blocks.back().paragraph);
    struct Scored {
        std::size_t overlap;
        std::size_t index;
        double label;
    };
    std::vector<Scored> demos;
    for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
        if (!blocks[i].label) continue;
        const auto tokens = token_set(blocks[i].paragraph);
        std::size_t overlap = 0;
        for (const auto& t : tokens) overlap += target_tokens.count(t);
        demos.push_back({overlap, i, *blocks[i].label});
    }

    double answer = default_value_;
    if (!demos.empty()) {
        std::stable_sort(demos.begin(), demos.end(),
                         [](const Scored& a, const Scored& b) { return a.overlap > b.overlap; });
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k_), demos.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < take; ++i) sum += demos[i].label;
        answer = sum / static_cast<double>(take);
    }
    std::vector<std::string> out;
    out.assign(static_cast<std::size_t>(request.n_samples), "Answer: " + format_roundtrip(answer));
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_numbered_line(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t digits = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        ++i;
        ++digits;
    }
    return digits > 0 && i < line.size() && (line[i] == '.' || line[i] == ')');
}

// Class argument following `from` inside one call's argument list: quoted
// string wins, else the bare word after "class=" or after a comma.
std::string extract_class_arg(const std::string& line, std::size_t from) {
    const auto open = line.find('(', from);
    if (open == std::string::npos) return "";
    std::size_t depth = 1, close = open + 1;
    while (close < line.size() && depth > 0) {
        if (line[close] == '(') ++depth;
        if (line[close] == ')') --depth;
        ++close;
    }
    const std::string args = line.substr(open + 1, close - open - (depth == 0 ? 2 : 1));

    for (char quote : {'"', '\''}) {
        const auto q1 = args.find(quote);
        if (q1 == std::string::npos) continue;
        const auto q2 = args.find(quote, q1 + 1);
        if (q2 == std::string::npos) continue;
        return args.substr(q1 + 1, q2 - q1 - 1);
    }

    const auto kw = args.find("class=");
    std::string tail;
    if (kw != std::string::npos) {
        tail = args.substr(kw + 6);
    } else {
        const auto comma = args.find(',');
        if (comma == std::string::npos) return "";
        tail = args.substr(comma + 1);
    }
    std::string word;
    for (char c : tail) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            word.push_back(c);
        } else if (!word.empty()) {
            break;
        }
    }
    return word;
}

std::optional<std::pair<ModuleFamily, std::size_t>> find_family(const std::string& line,
                                                                std::size_t from) {
    std::optional<std::pair<ModuleFamily, std::size_t>> best;
    for (ModuleFamily f : {ModuleFamily::get_aggregate_neighbor_info, ModuleFamily::get_address,
                           ModuleFamily::get_area, ModuleFamily::get_night_light,
                           ModuleFamily::count_area, ModuleFamily::get_distance_to_nearest_target}) {
        const auto pos = line.find(family_name(f), from);
        if (pos == std::string::npos) continue;
        if (!best || pos < best->second) best = {{f, pos}};
    }
    return best;
}

}  // namespace

ParsedModuleList parse_module_list(const std::string& text) {
    ParsedModuleList out;
    std::set<std::string> seen;  // dedup within one response

    auto add_call = [&](ModuleCall call) {
        try {
            validate_call(call);
        } catch (const ValidationError& e) {
            out.warnings.push_back(e.what());
            return;
        }
        if (seen.insert(call_id(call)).second) out.calls.push_back(std::move(call));
    };

    for (const auto& raw : split_lines(text)) {
        if (!is_numbered_line(raw)) continue;
        const auto found = find_family(raw, 0);
        if (!found) {
            const std::string item = trim(raw);
            if (!item.empty()) out.warnings.push_back("unrecognized module entry: " + item);
            continue;
        }
        auto [family, pos] = *found;
        if (family == ModuleFamily::get_aggregate_neighbor_info) {
            const auto inner = find_family(raw, pos + family_name(family).size());
            if (!inner || inner->first == ModuleFamily::get_aggregate_neighbor_info ||
                inner->first == ModuleFamily::get_address) {
                out.warnings.push_back("unsupported neighbor aggregation entry: " + trim(raw));
                continue;
            }
            ModuleCall call;
            call.neighbor = true;
            call.family = inner->first;
            if (call.family == ModuleFamily::count_area ||
                call.family == ModuleFamily::get_distance_to_nearest_target) {
                call.class_arg = extract_class_arg(raw, inner->second);
            }
            add_call(std::move(call));
        } else {
            ModuleCall call;
            call.family = family;
            if (family == ModuleFamily::count_area ||
                family == ModuleFamily::get_distance_to_nearest_target) {
                call.class_arg = extract_class_arg(raw, pos);
            }
            add_call(std::move(call));
        }
    }
    return out;
}

std::optional<double> parse_numeric_answer(const std::string& text) {
    auto scan = [](const std::string& region) -> std::optional<double> {
        std::istringstream is(region);
        std::string token;
        while (is >> token) {
            std::string cleaned;
            for (const char c : token) {
                if (c == ',' || c == '$' || c == '(' || c == ')' || c == '%' || c == '"' ||
                    c == '\'') {
                    continue;
                }
                cleaned.push_back(c);
            }
            double v;
            if (parse_full_double(cleaned, v)) return v;
            // tolerate a trailing sentence period: "0.229." -> "0.229"
            if (!cleaned.empty() && cleaned.back() == '.') {
                cleaned.pop_back();
                if (parse_full_double(cleaned, v)) return v;
            }
        }
        return std::nullopt;
    };

    const auto marker = text.rfind("Answer:");
    if (marker != std::string::npos) {
        if (auto v = scan(text.substr(marker + 7))) return v;
    }
    return scan(text);
}

std::unique_ptr<Backend> make_backend(const nlohmann::json& config) {
    const std::string kind = config.value("kind", "");
    if (kind == "scripted") {
        std::vector<std::string> responses;
        for (const auto& r : config.value("responses", nlohmann::json::array())) {
            responses.push_back(r.get<std::string>());
        }
        return std::make_unique<ScriptedBackend>(std::move(responses));
    }
    if (kind == "linear_oracle") {
        std::vector<double> weights;
        for (const auto& w : config.value("weights", nlohmann::json::array())) {
            weights.push_back(w.get<double>());
        }
        return std::make_unique<LinearOracleBackend>(std::move(weights),
                                                     config.value("bias", 0.0));
    }
    if (kind == "knn_oracle") {
        return std::make_unique<KnnOracleBackend>(config.value("k", 3),
                                                  config.value("default_value", 0.0));
    }
    if (kind == "http_chat") {
        return make_http_chat_backend(config);
    }
    throw ConfigError("unknown backend kind: \"" + kind + "\"");
}

std::unique_ptr<Backend> load_backend(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open backend config: " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(config_path + ": " + e.what());
    }
    return make_backend(j);
}

}  // namespace geoinfer
