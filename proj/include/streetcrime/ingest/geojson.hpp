#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "streetcrime/core/error.hpp"
#include "streetcrime/geo/geometry.hpp"
#include "streetcrime/geo/join.hpp"

namespace streetcrime::ingest {

namespace detail {

using nlohmann::json;

inline json parse_json(std::istream& in, const std::string& source) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(source, std::string("invalid JSON: ") + e.what());
    }
}

inline const json& features_of(const json& doc, const std::string& source) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array())
        throw ParseError(source, "expected a GeoJSON FeatureCollection");
    return doc["features"];
}

inline geo::GeoPoint position(const json& pos, const std::string& where) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
        throw ParseError(where, "position must be [lon, lat]");
    geo::GeoPoint p{pos[0].get<double>(), pos[1].get<double>()};
    if (!geo::is_valid(p)) throw ParseError(where, "coordinate out of range " + geo::to_string(p));
    return p;
}

inline std::vector<geo::GeoPoint> positions(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ParseError(where, "expected an array of positions");
    std::vector<geo::GeoPoint> out;
    out.reserve(arr.size());
    for (const auto& pos : arr) out.push_back(position(pos, where));
    return out;
}

inline geo::Polygon polygon(const json& rings, const std::string& where) {
    if (!rings.is_array() || rings.empty()) throw ParseError(where, "polygon needs at least one ring");
    std::vector<geo::Ring> holes;
    for (std::size_t r = 1; r < rings.size(); ++r) holes.push_back(positions(rings[r], where));
    try {
        return geo::Polygon(positions(rings[0], where), std::move(holes), where);
    } catch (const ValidationError& e) {
        throw ParseError(where, e.what());
    }
}

// Property value as a string id; numbers are printed as integers when integral.
inline std::optional<std::string> property_string(const json& feature, const std::string& key) {
    if (!feature.contains("properties") || !feature["properties"].is_object()) return std::nullopt;
    const auto& props = feature["properties"];
    auto it = props.find(key);
    if (it == props.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    if (it->is_number()) return format_double(it->get<double>());
    return it->dump();
}

} // namespace detail

// Default property carrying the id in the NYC community districts export.
inline const std::string kDefaultDistrictIdProperty = "boro_cd";

// One CommunityDistrict per Polygon/MultiPolygon feature. Area comes from the
// projected shoelace formula; road length is left at zero.
inline std::vector<geo::CommunityDistrict> parse_boundaries(std::istream& in,
                                                            const std::string& id_property = kDefaultDistrictIdProperty,
                                                            const std::string& source = "boundaries") {
    const auto doc = detail::parse_json(in, source);
    const auto& features = detail::features_of(doc, source);
    std::vector<geo::CommunityDistrict> out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::string where = source + ": feature " + std::to_string(i);
        const auto& f = features[i];
        auto id = detail::property_string(f, id_property);
        if (!id || id->empty()) throw ParseError(where, "missing id property '" + id_property + "'");
        if (!f.contains("geometry") || !f["geometry"].is_object())
            throw ParseError(where, "feature has no geometry");
        const auto& g = f["geometry"];
        const std::string type = g.value("type", "");
        std::vector<geo::Polygon> polys;
        if (type == "Polygon") {
            polys.push_back(detail::polygon(g["coordinates"], where));
        } else if (type == "MultiPolygon") {
            if (!g["coordinates"].is_array()) throw ParseError(where, "MultiPolygon coordinates must be an array");
            for (std::size_t k = 0; k < g["coordinates"].size(); ++k)
                polys.push_back(detail::polygon(g["coordinates"][k], where + " part " + std::to_string(k)));
        } else {
            throw ParseError(where, "unsupported geometry type '" + type + "'");
        }
        try {
            out.push_back(geo::make_district(*id, std::move(polys)));
        } catch (const ValidationError& e) {
            throw ParseError(where, e.what());
        }
    }
    try {
        geo::validate_districts(out);
    } catch (const ValidationError& e) {
        throw ParseError(source, e.what());
    }
    return out;
}

struct CenterlineParse {
    std::vector<geo::Polyline> lines;
    std::size_t skipped_degenerate = 0;  // parts with < 2 distinct vertices
};

// LineString/MultiLineString features. Consecutive duplicate vertices are
// collapsed; parts left with fewer than two vertices are skipped and counted.
// Ids come from `id_property` when present, otherwise the feature index;
// MultiLineString parts get a "/<part>" suffix.
inline CenterlineParse parse_centerlines(std::istream& in, const std::string& id_property = "physicalid",
                                         const std::string& source = "centerlines") {
    const auto doc = detail::parse_json(in, source);
    const auto& features = detail::features_of(doc, source);
    CenterlineParse out;
    auto add = [&](std::string id, std::vector<geo::GeoPoint> pts, const std::string& where) {
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (pts.size() < 2) {
            ++out.skipped_degenerate;
            return;
        }
        try {
            out.lines.emplace_back(std::move(id), std::move(pts));
        } catch (const ValidationError& e) {
            throw ParseError(where, e.what());
        }
    };
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::string where = source + ": feature " + std::to_string(i);
        const auto& f = features[i];
        const std::string id = detail::property_string(f, id_property).value_or(std::to_string(i));
        if (!f.contains("geometry") || !f["geometry"].is_object())
            throw ParseError(where, "feature has no geometry");
        const auto& g = f["geometry"];
        const std::string type = g.value("type", "");
        if (type == "LineString") {
            add(id, detail::positions(g["coordinates"], where), where);
        } else if (type == "MultiLineString") {
            const auto& parts = g["coordinates"];
            if (!parts.is_array()) throw ParseError(where, "MultiLineString coordinates must be an array");
            for (std::size_t k = 0; k < parts.size(); ++k)
                add(id + "/" + std::to_string(k), detail::positions(parts[k], where), where);
        } else {
            throw ParseError(where, "unsupported geometry type '" + type + "'");
        }
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : out.lines)
        if (!seen.insert(l.id()).second) throw ParseError(source, "duplicate centerline id '" + l.id() + "'");
    return out;
}

} // namespace streetcrime::ingest
