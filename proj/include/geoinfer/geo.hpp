#pragma once

#include <string>
#include <vector>

namespace geoinfer::geo {

inline constexpr double kEarthRadiusKm = 6371.0072;  // authalic sphere
inline constexpr double kDegToRad = 0.01745329251994329577;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

inline bool operator==(const LonLat& a, const LonLat& b) {
    return a.lon == b.lon && a.lat == b.lat;
}

// Closed ring: first vertex repeated as last, >= 4 entries.
using Ring = std::vector<LonLat>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

// Polygon or multipolygon; zonal statistics and adjacency operate on the
// union of parts.
struct Geometry {
    std::vector<Polygon> parts;
};

struct BBox {
    double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;

    bool contains(const LonLat& p) const {
        return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
    }
    BBox expanded(double pad) const {
        return {min_lon - pad, min_lat - pad, max_lon + pad, max_lat + pad};
    }
    bool intersects(const BBox& o) const {
        return min_lon <= o.max_lon && o.min_lon <= max_lon && min_lat <= o.max_lat &&
               o.min_lat <= max_lat;
    }
};

// Ring closure, vertex counts, coordinate ranges, antimeridian edges.
// Throws GeometryError; every other function here assumes valid input.
void validate_geometry(const Geometry& g, const std::string& label);

BBox bounding_box(const Geometry& g);

double haversine_distance_km(const LonLat& a, const LonLat& b);

// Spherical-excess area on the authalic sphere; holes subtract, parts add,
// ring orientation is ignored.
double spherical_polygon_area_km2(const Geometry& g);

// Even-odd rule in lon/lat space; points on a boundary segment count as
// inside.
bool point_in_polygon(const LonLat& p, const Geometry& g);

// Area-weighted centroid in an equirectangular projection about the
// geometry's mean latitude.
LonLat centroid(const Geometry& g);

// True if the two geometries share at least one boundary point, allowing a
// snap tolerance in degrees (vertex jitter in real boundary files).
bool geometries_touch(const Geometry& a, const Geometry& b, double tol_deg);

namespace detail {
double segment_segment_distance(const LonLat& a1, const LonLat& a2, const LonLat& b1,
                                const LonLat& b2);
bool point_on_segment(const LonLat& p, const LonLat& a, const LonLat& b);
}  // namespace detail

}  // namespace geoinfer::geo
