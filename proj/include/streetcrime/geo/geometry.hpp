#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"

namespace streetcrime::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct GeoPoint {
    double lon = 0;  // degrees, [-180, 180]
    double lat = 0;  // degrees, [-90, 90]

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180 && p.lon <= 180 &&
           p.lat >= -90 && p.lat <= 90;
}

inline std::string to_string(const GeoPoint& p) {
    return "(" + format_double(p.lon) + ", " + format_double(p.lat) + ")";
}

inline void validate(const GeoPoint& p) {
    if (!is_valid(p)) throw ValidationError("coordinate out of range: " + to_string(p));
}

// Local planar coordinates in meters relative to a projection origin.
struct Planar {
    double x = 0;
    double y = 0;
};

inline double distance(Planar a, Planar b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Equirectangular projection about `origin`:
//   x = R * dlon * cos(lat_origin),  y = R * dlat   (angles in radians).
// Only meaningful at city scale; points more than 1 degree from the origin
// are rejected.
inline Planar project_local(const GeoPoint& p, const GeoPoint& origin) {
    validate(p);
    validate(origin);
    if (std::abs(p.lon - origin.lon) > 1.0 || std::abs(p.lat - origin.lat) > 1.0)
        throw ValidationError("point " + to_string(p) + " is more than 1 degree from projection origin " +
                              to_string(origin));
    return {kEarthRadiusM * (p.lon - origin.lon) * kDegToRad * std::cos(origin.lat * kDegToRad),
            kEarthRadiusM * (p.lat - origin.lat) * kDegToRad};
}

inline GeoPoint unproject_local(const Planar& q, const GeoPoint& origin) {
    validate(origin);
    const double cos_lat = std::cos(origin.lat * kDegToRad);
    if (cos_lat <= 0) throw ValidationError("projection origin at a pole");
    GeoPoint p{origin.lon + q.x / (kEarthRadiusM * cos_lat) / kDegToRad,
               origin.lat + q.y / kEarthRadiusM / kDegToRad};
    validate(p);
    return p;
}

// Arithmetic mean of the vertices; the projection origin for a polyline.
inline GeoPoint centroid(std::span<const GeoPoint> pts) {
    GeoPoint c{0, 0};
    for (const auto& p : pts) {
        c.lon += p.lon;
        c.lat += p.lat;
    }
    c.lon /= static_cast<double>(pts.size());
    c.lat /= static_cast<double>(pts.size());
    return c;
}

// Road centerline. At least two vertices, no consecutive duplicates, positive length.
class Polyline {
public:
    Polyline(std::string id, std::vector<GeoPoint> vertices) : id_(std::move(id)), vertices_(std::move(vertices)) {
        if (vertices_.size() < 2) throw ValidationError("polyline '" + id_ + "' needs at least 2 vertices");
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            validate(vertices_[i]);
            if (i > 0 && vertices_[i] == vertices_[i - 1])
                throw ValidationError("polyline '" + id_ + "' repeats vertex " + std::to_string(i));
        }
        origin_ = centroid(vertices_);
        projected_.reserve(vertices_.size());
        for (const auto& v : vertices_) projected_.push_back(project_local(v, origin_));
        cumulative_.assign(vertices_.size(), 0.0);
        for (std::size_t i = 1; i < projected_.size(); ++i)
            cumulative_[i] = cumulative_[i - 1] + distance(projected_[i - 1], projected_[i]);
        if (!(cumulative_.back() > 0)) throw ValidationError("polyline '" + id_ + "' has zero length");
    }

    const std::string& id() const noexcept { return id_; }
    std::span<const GeoPoint> vertices() const noexcept { return vertices_; }
    const GeoPoint& origin() const noexcept { return origin_; }
    std::span<const Planar> projected() const noexcept { return projected_; }
    // Chainage of each vertex, meters.
    std::span<const double> cumulative() const noexcept { return cumulative_; }
    double length_m() const noexcept { return cumulative_.back(); }

private:
    std::string id_;
    std::vector<GeoPoint> vertices_;
    GeoPoint origin_;
    std::vector<Planar> projected_;
    std::vector<double> cumulative_;
};

// Sum of projected segment lengths with the vertex centroid as origin.
inline double polyline_length(const Polyline& line) { return line.length_m(); }

using Ring = std::vector<GeoPoint>;

struct BoundingBox {
    double min_lon = 180, min_lat = 90, max_lon = -180, max_lat = -90;

    void extend(const GeoPoint& p) {
        min_lon = std::min(min_lon, p.lon);
        max_lon = std::max(max_lon, p.lon);
        min_lat = std::min(min_lat, p.lat);
        max_lat = std::max(max_lat, p.lat);
    }
    bool contains(const GeoPoint& p) const {
        return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
    }
};

namespace detail {

inline double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
    return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

inline bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
    return cross(a, b, p) == 0.0 && p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
           p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

inline int sign(double v) { return (v > 0) - (v < 0); }

inline bool segments_intersect(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
    const int d1 = sign(cross(c, d, a)), d2 = sign(cross(c, d, b));
    const int d3 = sign(cross(a, b, c)), d4 = sign(cross(a, b, d));
    if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
           (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

inline void validate_ring(const Ring& ring, const std::string& what) {
    if (ring.size() < 4) throw ValidationError(what + ": ring needs at least 4 positions");
    if (ring.front() != ring.back()) throw ValidationError(what + ": ring is not closed");
    for (const auto& p : ring) validate(p);
}

// Any two non-adjacent edges touching, or adjacent edges folding back on
// each other, makes the ring self-intersecting.
inline void validate_simple(const Ring& ring, const std::string& what) {
    const std::size_t m = ring.size() - 1;  // edge count
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if (adjacent) {
                // Shared vertex is expected; collinear overlap is not.
                const GeoPoint& shared = (j == i + 1) ? ring[j] : ring[i];
                const GeoPoint& a = (j == i + 1) ? ring[i] : ring[i + 1];
                const GeoPoint& b = (j == i + 1) ? ring[j + 1] : ring[j];
                if (cross(shared, a, b) == 0.0 && (a.lon - shared.lon) * (b.lon - shared.lon) +
                                                          (a.lat - shared.lat) * (b.lat - shared.lat) > 0)
                    throw ValidationError(what + ": edges " + std::to_string(i) + " and " + std::to_string(j) +
                                          " overlap");
                continue;
            }
            if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]))
                throw ValidationError(what + ": edges " + std::to_string(i) + " and " + std::to_string(j) +
                                      " intersect");
        }
    }
}

} // namespace detail

// Polygon with optional holes. Rings are closed (first == last) with at least
// four positions; the exterior must not self-intersect.
class Polygon {
public:
    explicit Polygon(Ring exterior, std::vector<Ring> holes = {}, const std::string& label = "polygon")
        : exterior_(std::move(exterior)), holes_(std::move(holes)) {
        detail::validate_ring(exterior_, label + " exterior");
        detail::validate_simple(exterior_, label + " exterior");
        for (std::size_t h = 0; h < holes_.size(); ++h)
            detail::validate_ring(holes_[h], label + " hole " + std::to_string(h));
        for (const auto& p : exterior_) bbox_.extend(p);
    }

    const Ring& exterior() const noexcept { return exterior_; }
    const std::vector<Ring>& holes() const noexcept { return holes_; }
    const BoundingBox& bbox() const noexcept { return bbox_; }

private:
    Ring exterior_;
    std::vector<Ring> holes_;
    BoundingBox bbox_;
};

// Shoelace area of a ring in square meters, projected about the ring's vertex
// centroid.
inline double ring_area_m2(const Ring& ring) {
    const GeoPoint origin = centroid(std::span(ring).first(ring.size() - 1));
    double twice = 0;
    Planar prev = project_local(ring[0], origin);
    for (std::size_t i = 1; i < ring.size(); ++i) {
        const Planar cur = project_local(ring[i], origin);
        twice += prev.x * cur.y - cur.x * prev.y;
        prev = cur;
    }
    return std::abs(twice) / 2.0;
}

inline double polygon_area_km2(const Polygon& poly) {
    double a = ring_area_m2(poly.exterior());
    for (const auto& h : poly.holes()) a -= ring_area_m2(h);
    return a / 1e6;
}

struct CommunityDistrict {
    std::string community_id;
    std::vector<Polygon> boundary;
    double area_km2 = 0;
    double road_length_km = 0;
    BoundingBox bbox;
};

// Builds a district, computing area and bounding box from the polygons.
inline CommunityDistrict make_district(std::string id, std::vector<Polygon> boundary) {
    if (boundary.empty()) throw ValidationError("district '" + id + "' has no polygons");
    CommunityDistrict d{std::move(id), std::move(boundary), 0, 0, {}};
    for (const auto& p : d.boundary) {
        d.area_km2 += polygon_area_km2(p);
        d.bbox.extend({p.bbox().min_lon, p.bbox().min_lat});
        d.bbox.extend({p.bbox().max_lon, p.bbox().max_lat});
    }
    if (!(d.area_km2 > 0)) throw ValidationError("district '" + d.community_id + "' has zero area");
    return d;
}

struct SamplePoint {
    std::string point_id;
    GeoPoint location;
    std::string source_polyline;
    double chainage_m = 0;
    std::optional<std::string> community_id;

    friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

} // namespace streetcrime::geo
