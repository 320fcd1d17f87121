#include "geoinfer/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "geoinfer/errors.hpp"

namespace geoinfer::geo {

namespace {

std::array<double, 3> unit_vector(const LonLat& p) {
    const double lon = p.lon * kDegToRad;
    const double lat = p.lat * kDegToRad;
    const double c = std::cos(lat);
    return {c * std::cos(lon), c * std::sin(lon), std::sin(lat)};
}

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Signed solid angle of the spherical triangle (a, b, c); Van Oosterom &
// Strackee's tangent formula, stable for small triangles.
double signed_triangle_excess(const std::array<double, 3>& a, const std::array<double, 3>& b,
                              const std::array<double, 3>& c) {
    const double numer = dot(a, cross(b, c));
    const double denom = 1.0 + dot(a, b) + dot(b, c) + dot(a, c);
    return 2.0 * std::atan2(numer, denom);
}

std::size_t distinct_vertices(const Ring& ring) {
    // ring is closed; ignore the duplicated last vertex
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) {
            if (ring[i] == ring[j]) {
                seen = true;
                break;
            }
        }
        if (!seen) ++n;
    }
    return n;
}

double ring_excess(const Ring& ring) {
    if (distinct_vertices(ring) < 3) {
        throw GeometryError("degenerate ring with fewer than 3 distinct vertices");
    }
    // fan from the first vertex over the closed ring
    const auto v0 = unit_vector(ring[0]);
    double excess = 0.0;
    for (std::size_t i = 1; i + 2 < ring.size(); ++i) {
        excess += signed_triangle_excess(v0, unit_vector(ring[i]), unit_vector(ring[i + 1]));
    }
    return excess;
}

bool ray_crosses(const LonLat& p, const LonLat& a, const LonLat& b) {
    if ((a.lat > p.lat) == (b.lat > p.lat)) return false;
    const double t = (p.lat - a.lat) / (b.lat - a.lat);
    const double x = a.lon + t * (b.lon - a.lon);
    return x > p.lon;
}

template <typename RingFn>
void for_each_ring(const Geometry& g, RingFn&& fn) {
    for (const auto& part : g.parts) {
        fn(part.outer);
        for (const auto& hole : part.holes) fn(hole);
    }
}

}  // namespace

void validate_geometry(const Geometry& g, const std::string& label) {
    if (g.parts.empty()) throw GeometryError(label + ": geometry has no polygon parts");
    for_each_ring(g, [&](const Ring& ring) {
        if (ring.size() < 4) {
            throw GeometryError(label + ": ring has fewer than 4 vertices");
        }
        if (!(ring.front() == ring.back())) {
            throw GeometryError(label + ": ring is not closed (first vertex != last)");
        }
        for (const auto& v : ring) {
            if (!(v.lon >= -180.0 && v.lon <= 180.0 && v.lat >= -90.0 && v.lat <= 90.0) ||
                !std::isfinite(v.lon) || !std::isfinite(v.lat)) {
                throw GeometryError(label + ": coordinate out of range");
            }
        }
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            if (std::fabs(ring[i].lon - ring[i + 1].lon) > 180.0) {
                throw GeometryError(label + ": antimeridian-crossing edges are not supported");
            }
        }
    });
}

BBox bounding_box(const Geometry& g) {
    BBox box{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
             std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for_each_ring(g, [&](const Ring& ring) {
        for (const auto& v : ring) {
            box.min_lon = std::min(box.min_lon, v.lon);
            box.min_lat = std::min(box.min_lat, v.lat);
            box.max_lon = std::max(box.max_lon, v.lon);
            box.max_lat = std::max(box.max_lat, v.lat);
        }
    });
    return box;
}

double haversine_distance_km(const LonLat& a, const LonLat& b) {
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = lat2 - lat1;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double spherical_polygon_area_km2(const Geometry& g) {
    const double r2 = kEarthRadiusKm * kEarthRadiusKm;
    double total = 0.0;
    for (const auto& part : g.parts) {
        double area = std::fabs(ring_excess(part.outer)) * r2;
        for (const auto& hole : part.holes) {
            area -= std::fabs(ring_excess(hole)) * r2;
        }
        total += area;
    }
    return total;
}

bool point_in_polygon(const LonLat& p, const Geometry& g) {
    bool inside = false;
    bool boundary = false;
    for_each_ring(g, [&](const Ring& ring) {
        if (boundary) return;
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            if (detail::point_on_segment(p, ring[i], ring[i + 1])) {
                boundary = true;
                return;
            }
            if (ray_crosses(p, ring[i], ring[i + 1])) inside = !inside;
        }
    });
    return boundary || inside;
}

LonLat centroid(const Geometry& g) {
    // mean latitude of outer-ring vertices fixes the projection scale
    double lat_sum = 0.0;
    std::size_t n = 0;
    for (const auto& part : g.parts) {
        for (std::size_t i = 0; i + 1 < part.outer.size(); ++i) {
            lat_sum += part.outer[i].lat;
            ++n;
        }
    }
    const double lat0 = n ? lat_sum / static_cast<double>(n) : 0.0;
    const double kx = std::cos(lat0 * kDegToRad);

    double area_acc = 0.0, cx_acc = 0.0, cy_acc = 0.0;
    auto accumulate_ring = [&](const Ring& ring, double sign) {
        double a = 0.0, cx = 0.0, cy = 0.0;
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double x1 = ring[i].lon * kx, y1 = ring[i].lat;
            const double x2 = ring[i + 1].lon * kx, y2 = ring[i + 1].lat;
            const double w = x1 * y2 - x2 * y1;
            a += w;
            cx += (x1 + x2) * w;
            cy += (y1 + y2) * w;
        }
        // shoelace gives signed values; normalize so outer adds, holes subtract
        const double ring_sign = (a >= 0.0 ? 1.0 : -1.0) * sign;
        area_acc += ring_sign * std::fabs(a);
        cx_acc += ring_sign * std::fabs(a) * (a == 0.0 ? 0.0 : cx / (3.0 * a));
        cy_acc += ring_sign * std::fabs(a) * (a == 0.0 ? 0.0 : cy / (3.0 * a));
    };
    for (const auto& part : g.parts) {
        accumulate_ring(part.outer, 1.0);
        for (const auto& hole : part.holes) accumulate_ring(hole, -1.0);
    }
    if (area_acc == 0.0) {
        // fall back to vertex mean for degenerate input
        double lon_sum = 0.0;
        std::size_t m = 0;
        for (const auto& part : g.parts) {
            for (std::size_t i = 0; i + 1 < part.outer.size(); ++i) {
                lon_sum += part.outer[i].lon;
                ++m;
            }
        }
        return {m ? lon_sum / static_cast<double>(m) : 0.0, lat0};
    }
    return {cx_acc / area_acc / kx, cy_acc / area_acc};
}

namespace detail {

bool point_on_segment(const LonLat& p, const LonLat& a, const LonLat& b) {
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (cross != 0.0) return false;
    const double d = (p.lon - a.lon) * (b.lon - a.lon) + (p.lat - a.lat) * (b.lat - a.lat);
    const double len2 = (b.lon - a.lon) * (b.lon - a.lon) + (b.lat - a.lat) * (b.lat - a.lat);
    return d >= 0.0 && d <= len2;
}

namespace {

double point_segment_distance(const LonLat& p, const LonLat& a, const LonLat& b) {
    const double vx = b.lon - a.lon, vy = b.lat - a.lat;
    const double wx = p.lon - a.lon, wy = p.lat - a.lat;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.lon - (a.lon + t * vx), dy = p.lat - (a.lat + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

int orientation(const LonLat& a, const LonLat& b, const LonLat& c) {
    const double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool segments_properly_intersect(const LonLat& a1, const LonLat& a2, const LonLat& b1,
                                 const LonLat& b2) {
    const int o1 = orientation(a1, a2, b1);
    const int o2 = orientation(a1, a2, b2);
    const int o3 = orientation(b1, b2, a1);
    const int o4 = orientation(b1, b2, a2);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

double segment_segment_distance(const LonLat& a1, const LonLat& a2, const LonLat& b1,
                                const LonLat& b2) {
    if (segments_properly_intersect(a1, a2, b1, b2)) return 0.0;
    double d = point_segment_distance(a1, b1, b2);
    d = std::min(d, point_segment_distance(a2, b1, b2));
    d = std::min(d, point_segment_distance(b1, a1, a2));
    d = std::min(d, point_segment_distance(b2, a1, a2));
    return d;
}

}  // namespace detail

bool geometries_touch(const Geometry& a, const Geometry& b, double tol_deg) {
    const BBox bb = bounding_box(b).expanded(tol_deg);
    if (!bounding_box(a).expanded(tol_deg).intersects(bounding_box(b))) return false;
    bool touch = false;
    for_each_ring(a, [&](const Ring& ra) {
        if (touch) return;
        for_each_ring(b, [&](const Ring& rb) {
            if (touch) return;
            for (std::size_t i = 0; i + 1 < ra.size() && !touch; ++i) {
                // cheap reject: segment bbox vs other geometry bbox
                const double lo = std::min(ra[i].lon, ra[i + 1].lon) - tol_deg;
                const double hi = std::max(ra[i].lon, ra[i + 1].lon) + tol_deg;
                const double la = std::min(ra[i].lat, ra[i + 1].lat) - tol_deg;
                const double lb = std::max(ra[i].lat, ra[i + 1].lat) + tol_deg;
                if (hi < bb.min_lon || lo > bb.max_lon || lb < bb.min_lat || la > bb.max_lat) {
                    continue;
                }
                for (std::size_t j = 0; j + 1 < rb.size(); ++j) {
                    if (detail::segment_segment_distance(ra[i], ra[i + 1], rb[j], rb[j + 1]) <=
                        tol_deg) {
                        touch = true;
                        break;
                    }
                }
            }
        });
    });
    return touch;
}

}  // namespace geoinfer::geo
