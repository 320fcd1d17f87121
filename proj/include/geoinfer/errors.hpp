#pragma once

#include <stdexcept>
#include <string>

namespace geoinfer {

// Error taxonomy shared across the pipeline. Everything derives from
// std::runtime_error so callers that do not care can catch one type.

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exhausted retries against a remote endpoint, or a scripted backend that
// ran out of canned responses.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ModuleError : std::runtime_error {
    explicit ModuleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace geoinfer
