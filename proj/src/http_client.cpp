#include "geoinfer/http_client.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "geoinfer/errors.hpp"
#include "geoinfer/llm.hpp"
#include "geoinfer/numformat.hpp"

namespace geoinfer {

namespace {

using Clock = std::chrono::steady_clock;

// Combined in-flight cap and requests-per-minute window.
class RequestThrottle {
public:
    RequestThrottle(int max_in_flight, int requests_per_minute)
        : max_in_flight_(max_in_flight), per_minute_(requests_per_minute) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return max_in_flight_ <= 0 || in_flight_ < max_in_flight_; });
        ++in_flight_;
        if (per_minute_ > 0) {
            while (true) {
                const auto now = Clock::now();
                while (!window_.empty() && now - window_.front() > std::chrono::minutes(1)) {
                    window_.pop_front();
                }
                if (static_cast<int>(window_.size()) < per_minute_) break;
                const auto wake = window_.front() + std::chrono::minutes(1);
                cv_.wait_until(lock, wake);
            }
            window_.push_back(Clock::now());
        }
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            --in_flight_;
        }
        cv_.notify_all();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    int max_in_flight_;
    int per_minute_;
    std::deque<Clock::time_point> window_;
};

struct ScopedSlot {
    RequestThrottle& throttle;
    explicit ScopedSlot(RequestThrottle& t) : throttle(t) { throttle.acquire(); }
    ~ScopedSlot() { throttle.release(); }
};

class HttpChatBackend : public Backend {
public:
    explicit HttpChatBackend(const nlohmann::json& config)
        : base_url_(config.value("base_url", "")),
          path_(config.value("path", "/v1/chat/completions")),
          model_(config.value("model", "gpt-4")),
          api_key_env_(config.value("api_key_env", "GEOINFER_API_KEY")),
          max_retries_(config.value("max_retries", 3)),
          timeout_s_(config.value("timeout_s", 30.0)),
          backoff_initial_ms_(config.value("backoff_initial_ms", 250.0)),
          max_prompt_chars_(config.value("max_prompt_chars", std::size_t{0})),
          throttle_(config.value("max_in_flight", 4), config.value("requests_per_minute", 0)) {
        if (base_url_.empty()) throw ConfigError("http_chat backend requires base_url");
    }

    std::vector<std::string> complete(const CompletionRequest& request) override {
        nlohmann::json body;
        body["model"] = model_;
        body["messages"] = nlohmann::json::array(
            {nlohmann::json{{"role", "user"}, {"content", request.prompt}}});
        body["temperature"] = request.temperature;
        body["top_p"] = request.top_p;
        body["n"] = request.n_samples;
        body["max_tokens"] = request.max_tokens;
        const std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= max_retries_; ++attempt) {
            if (attempt > 0) {
                const double ms = backoff_initial_ms_ * static_cast<double>(1 << (attempt - 1));
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(static_cast<long>(ms)));
            }
            ScopedSlot slot(throttle_);
            httplib::Client client(base_url_);
            client.set_connection_timeout(static_cast<int>(timeout_s_));
            client.set_read_timeout(static_cast<int>(timeout_s_), 0);
            httplib::Headers headers;
            if (const char* key = std::getenv(api_key_env_.c_str())) {
                headers.emplace("Authorization", std::string("Bearer ") + key);
            }
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status >= 400) {
                throw TransportError("http_chat request rejected with status " +
                                     std::to_string(res->status) + ": " + res->body);
            }
            return parse_choices(res->body, request.n_samples);
        }
        throw TransportError("http_chat exhausted " + std::to_string(max_retries_) +
                             " retries: " + last_error);
    }

    std::string kind() const override { return "http_chat"; }
    std::size_t max_prompt_chars() const override { return max_prompt_chars_; }

private:
    static std::vector<std::string> parse_choices(const std::string& body, int n_expected) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const std::exception& e) {
            throw TransportError(std::string("http_chat: invalid response JSON: ") + e.what());
        }
        std::vector<std::string> out;
        for (const auto& choice : j.value("choices", nlohmann::json::array())) {
            out.push_back(choice.at("message").at("content").get<std::string>());
        }
        if (static_cast<int>(out.size()) != n_expected) {
            throw TransportError("http_chat: expected " + std::to_string(n_expected) +
                                 " choices, got " + std::to_string(out.size()));
        }
        return out;
    }

    std::string base_url_;
    std::string path_;
    std::string model_;
    std::string api_key_env_;
    int max_retries_;
    double timeout_s_;
    double backoff_initial_ms_;
    std::size_t max_prompt_chars_;
    RequestThrottle throttle_;
};

class HttpGeocoder : public Geocoder {
public:
    explicit HttpGeocoder(HttpGeocoderConfig config) : config_(std::move(config)) {
        if (config_.base_url.empty()) throw ConfigError("geocoder requires base_url");
    }

    std::optional<std::string> reverse(const geo::LonLat& point) override {
        const std::string target = config_.path + "?lon=" + format_roundtrip(point.lon) +
                                   "&lat=" + format_roundtrip(point.lat);
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                const double ms =
                    config_.backoff_initial_ms * static_cast<double>(1 << (attempt - 1));
                std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(ms)));
            }
            httplib::Client client(config_.base_url);
            client.set_connection_timeout(static_cast<int>(config_.timeout_s));
            client.set_read_timeout(static_cast<int>(config_.timeout_s), 0);
            httplib::Headers headers;
            if (const char* key = std::getenv(config_.api_key_env.c_str())) {
                headers.emplace("X-Api-Key", key);
            }
            auto res = client.Get(target, headers);
            if (!res || res->status >= 500) continue;
            if (res->status >= 400) return std::nullopt;
            try {
                auto j = nlohmann::json::parse(res->body);
                if (j.contains("display_name")) return j["display_name"].get<std::string>();
                if (j.contains("address")) return j["address"].get<std::string>();
            } catch (const std::exception&) {
                return std::nullopt;
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

private:
    HttpGeocoderConfig config_;
};

}  // namespace

std::unique_ptr<Backend> make_http_chat_backend(const nlohmann::json& config) {
    return std::make_unique<HttpChatBackend>(config);
}

std::unique_ptr<Geocoder> make_http_geocoder(const HttpGeocoderConfig& config) {
    return std::make_unique<HttpGeocoder>(config);
}

}  // namespace geoinfer
