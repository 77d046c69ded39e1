#pragma once

#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::geo {

enum class RingLocation { outside, boundary, inside };

// Even-odd ray cast towards +lon in the (lon, lat) plane.
inline RingLocation locate_in_ring(const GeoPoint& p, const Ring& ring) {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const GeoPoint& a = ring[j];
        const GeoPoint& b = ring[i];
        if (detail::on_segment(p, a, b)) return RingLocation::boundary;
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (p.lon < x) inside = !inside;
        }
    }
    return inside ? RingLocation::inside : RingLocation::outside;
}

// Points on any edge, including hole edges, count as inside.
inline bool point_in_polygon(const GeoPoint& p, const Polygon& poly) {
    if (!poly.bbox().contains(p)) return false;
    switch (locate_in_ring(p, poly.exterior())) {
        case RingLocation::outside: return false;
        case RingLocation::boundary: return true;
        case RingLocation::inside: break;
    }
    for (const auto& hole : poly.holes()) {
        switch (locate_in_ring(p, hole)) {
            case RingLocation::boundary: return true;
            case RingLocation::inside: return false;
            case RingLocation::outside: break;
        }
    }
    return true;
}

inline bool district_contains(const CommunityDistrict& d, const GeoPoint& p) {
    if (!d.bbox.contains(p)) return false;
    for (const auto& poly : d.boundary)
        if (point_in_polygon(p, poly)) return true;
    return false;
}

} // namespace streetcrime::geo
