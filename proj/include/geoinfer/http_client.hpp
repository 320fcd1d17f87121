#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "geoinfer/geocoder.hpp"

namespace geoinfer {

class Backend;

// Chat-completion client over HTTP. Body: {model, messages:[{role,content}],
// temperature, top_p, n, max_tokens}; response text at
// choices[i].message.content. Transient failures (5xx, transport) retry up
// to max_retries with exponential backoff; 4xx never retries. The API key
// comes from the environment variable named by api_key_env.
std::unique_ptr<Backend> make_http_chat_backend(const nlohmann::json& config);

struct HttpGeocoderConfig {
    std::string base_url;
    std::string path = "/reverse";
    std::string api_key_env = "GEOINFER_GEOCODER_KEY";
    int max_retries = 3;
    double timeout_s = 10.0;
    double backoff_initial_ms = 100.0;
};

std::unique_ptr<Geocoder> make_http_geocoder(const HttpGeocoderConfig& config);

}  // namespace geoinfer
