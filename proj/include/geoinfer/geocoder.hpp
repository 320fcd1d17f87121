#pragma once

#include <map>
#include <optional>
#include <string>

#include "geoinfer/geo.hpp"

namespace geoinfer {

// Reverse geocoding hook used by the address module when a region has no
// gazetteer entry.
class Geocoder {
public:
    virtual ~Geocoder() = default;
    virtual std::optional<std::string> reverse(const geo::LonLat& point) = 0;
};

// Canned lookup for tests; counts requests so caching is observable.
class MockGeocoder : public Geocoder {
public:
    explicit MockGeocoder(std::string answer) : answer_(std::move(answer)) {}

    std::optional<std::string> reverse(const geo::LonLat&) override {
        ++requests_;
        return answer_;
    }
    long requests() const { return requests_; }

private:
    std::string answer_;
    long requests_ = 0;
};

}  // namespace geoinfer
