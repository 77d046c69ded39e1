#pragma once

#include <cctype>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::ingest {

enum class FetchStatus { pending, fetched, failed };

inline std::string to_string(FetchStatus s) {
    switch (s) {
        case FetchStatus::pending: return "pending";
        case FetchStatus::fetched: return "fetched";
        case FetchStatus::failed: return "failed";
    }
    return "pending";
}

inline std::optional<FetchStatus> parse_fetch_status(std::string_view s) {
    if (s == "pending") return FetchStatus::pending;
    if (s == "fetched") return FetchStatus::fetched;
    if (s == "failed") return FetchStatus::failed;
    return std::nullopt;
}

struct ImageSize {
    int width_px = 600;
    int height_px = 300;
};

struct ManifestEntry {
    std::string point_id;
    std::string image_file;  // relative to the image directory
    geo::GeoPoint location;
    int width_px = 600;
    int height_px = 300;
    std::optional<double> heading;  // reserved; unset means the API default
    FetchStatus status = FetchStatus::pending;
    std::string request_url;  // contains kApiKeyPlaceholder, never the key

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline const std::string kApiKeyPlaceholder = "{API_KEY}";
inline const std::string kDefaultStreetViewEndpoint = "https://maps.googleapis.com/maps/api/streetview";

// Manifest file, tab separated, one entry per line after this header:
inline const std::string kManifestHeader =
    "point_id\timage_file\tlon\tlat\twidth_px\theight_px\theading\tstatus\trequest_url";

// File name for a point id: [A-Za-z0-9_.-] kept, other bytes as ~XX hex.
inline std::string image_file_name(std::string_view point_id) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : point_id) {
        if (std::isalnum(c) || c == '_' || c == '.' || c == '-') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('~');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out + ".jpg";
}

inline std::string street_view_url(const geo::GeoPoint& loc, ImageSize size, std::optional<double> heading,
                                   const std::string& endpoint = kDefaultStreetViewEndpoint) {
    std::string url = endpoint + "?size=" + std::to_string(size.width_px) + "x" + std::to_string(size.height_px) +
                      "&location=" + format_fixed(loc.lat, 7) + "," + format_fixed(loc.lon, 7);
    if (heading) url += "&heading=" + format_double(*heading);
    return url + "&key=" + kApiKeyPlaceholder;
}

// One pending entry per point, in input order.
inline std::vector<ManifestEntry> build_image_manifest(const std::vector<geo::SamplePoint>& points, ImageSize size = {},
                                                const std::string& endpoint = kDefaultStreetViewEndpoint) {
    std::vector<ManifestEntry> out;
    for (const auto& p : points) {
        out.push_back({p.point_id, image_file_name(p.point_id), p.location, size.width_px, size.height_px,
                       std::nullopt, FetchStatus::pending, street_view_url(p.location, size, std::nullopt, endpoint)});
    }
    return out;
}

inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    out << kManifestHeader << '\n';
    for (const auto& e : entries) {
        out << e.point_id << '\t' << e.image_file << '\t' << format_fixed(e.location.lon, 7) << '\t'
            << format_fixed(e.location.lat, 7) << '\t' << e.width_px << '\t' << e.height_px << '\t'
            << (e.heading ? format_double(*e.heading) : "") << '\t' << to_string(e.status) << '\t' << e.request_url
            << '\n';
    }
}

inline std::string manifest_to_string(const std::vector<ManifestEntry>& entries) {
    std::ostringstream ss;
    write_manifest(ss, entries);
    return ss.str();
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in, const std::string& source = "manifest") {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kManifestHeader) throw ParseError(source, "unexpected header");
    std::vector<ManifestEntry> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source + ": line " + std::to_string(lineno);
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 9) throw ParseError(where, "expected 9 tab-separated fields");
        ManifestEntry e;
        e.point_id = f[0];
        e.image_file = f[1];
        const auto lon = parse_double(f[2]), lat = parse_double(f[3]);
        const auto w = parse_integer<int>(f[4]), h = parse_integer<int>(f[5]);
        const auto status = parse_fetch_status(f[7]);
        if (!lon || !lat || !geo::is_valid({*lon, *lat}) || !w || !h || *w <= 0 || *h <= 0 || !status)
            throw ParseError(where, "bad field value");
        e.location = {*lon, *lat};
        e.width_px = *w;
        e.height_px = *h;
        if (!f[6].empty()) {
            const auto heading = parse_double(f[6]);
            if (!heading) throw ParseError(where, "bad heading");
            e.heading = *heading;
        }
        e.status = *status;
        e.request_url = f[8];
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace streetcrime::ingest
