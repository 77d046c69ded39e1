#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::ingest {

// Sample points file written by `sample` and read by `fetch`/`aggregate`:
//   point_id,community_id,source_polyline,chainage_m,lon,lat
// Coordinates are written with 7 decimals (~1 cm), chainage with 3.
inline const std::vector<std::string> kPointsHeader{"point_id",   "community_id", "source_polyline",
                                                    "chainage_m", "lon",          "lat"};

inline void write_points_csv(std::ostream& out, const std::vector<geo::SamplePoint>& points) {
    csv::write_record(out, kPointsHeader);
    for (const auto& p : points)
        csv::write_record(out, {p.point_id, p.community_id.value_or(""), p.source_polyline,
                                format_fixed(p.chainage_m, 3), format_fixed(p.location.lon, 7),
                                format_fixed(p.location.lat, 7)});
}

inline std::vector<geo::SamplePoint> read_points_csv(std::istream& in, const std::string& source = "points csv") {
    std::vector<std::string> row;
    if (!csv::read_record(in, row) || row != kPointsHeader) throw ParseError(source, "unexpected header");
    std::vector<geo::SamplePoint> out;
    std::size_t line = 1;
    while (csv::read_record(in, row)) {
        ++line;
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const std::string where = source + ": line " + std::to_string(line);
        if (row.size() != kPointsHeader.size()) throw ParseError(where, "wrong field count");
        const auto chainage = parse_double(row[3]);
        const auto lon = parse_double(row[4]);
        const auto lat = parse_double(row[5]);
        if (!chainage || *chainage < 0 || !lon || !lat || !geo::is_valid({*lon, *lat}))
            throw ParseError(where, "bad numeric field");
        out.push_back({row[0], {*lon, *lat}, row[2], *chainage,
                       row[1].empty() ? std::nullopt : std::optional<std::string>(row[1])});
    }
    return out;
}

} // namespace streetcrime::ingest
