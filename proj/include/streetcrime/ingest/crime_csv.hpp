#pragma once

#include <algorithm>
#include <chrono>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::ingest {

struct CrimeRecord {
    std::string record_id;
    std::chrono::year_month_day occurred_at;
    std::string offense_category;
    geo::GeoPoint location;
};

// Column mapping; defaults follow the NYPD Arrests Data (Historic) export.
struct CrimeCsvConfig {
    std::string id_column = "ARREST_KEY";
    std::string date_column = "ARREST_DATE";
    std::string lat_column = "Latitude";
    std::string lon_column = "Longitude";
    std::string offense_column = "OFNS_DESC";
    // Records outside are dropped as out_of_bbox. Default covers the five boroughs.
    std::optional<geo::BoundingBox> bbox = geo::BoundingBox{-74.2591, 40.4774, -73.7004, 40.9176};
};

struct CrimeParseReport {
    std::size_t rows_read = 0;
    std::size_t kept = 0;
    std::size_t filtered_by_year = 0;
    // Reason -> count: bad_date, bad_coord, out_of_bbox, short_row.
    std::map<std::string, std::size_t> dropped;

    std::size_t total_dropped() const {
        std::size_t n = 0;
        for (const auto& [_, c] : dropped) n += c;
        return n;
    }
};

struct CrimeParse {
    std::vector<CrimeRecord> records;
    CrimeParseReport report;
};

// Accepts MM/DD/YYYY (NYPD export) and YYYY-MM-DD, optionally followed by a
// time component which is ignored.
inline std::optional<std::chrono::year_month_day> parse_calendar_date(std::string_view s) {
    s = trim(s);
    if (auto sp = s.find_first_of(" T"); sp != std::string_view::npos) s = s.substr(0, sp);
    int y = 0;
    unsigned m = 0, d = 0;
    auto part = [](std::string_view v) { return parse_integer<int>(v); };
    if (s.size() == 10 && s[2] == '/' && s[5] == '/') {
        auto mm = part(s.substr(0, 2)), dd = part(s.substr(3, 2)), yy = part(s.substr(6, 4));
        if (!mm || !dd || !yy) return std::nullopt;
        y = *yy, m = static_cast<unsigned>(*mm), d = static_cast<unsigned>(*dd);
    } else if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        auto yy = part(s.substr(0, 4)), mm = part(s.substr(5, 2)), dd = part(s.substr(8, 2));
        if (!mm || !dd || !yy) return std::nullopt;
        y = *yy, m = static_cast<unsigned>(*mm), d = static_cast<unsigned>(*dd);
    } else {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

// Streams the arrest CSV. Rows with unparseable dates or coordinates are
// dropped and counted; output keeps input order.
inline CrimeParse parse_crime_csv(std::istream& in, std::optional<int> year_filter = std::nullopt,
                                  const CrimeCsvConfig& config = {}, const std::string& source = "crime csv") {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) throw ParseError(source, "missing header row");
    csv::strip_bom(header);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(trim(header[i])), i);

    std::vector<std::string> missing;
    auto need = [&](const std::string& name) -> std::size_t {
        auto it = col.find(name);
        if (it == col.end()) {
            missing.push_back(name);
            return 0;
        }
        return it->second;
    };
    const std::size_t id_c = need(config.id_column), date_c = need(config.date_column),
                      lat_c = need(config.lat_column), lon_c = need(config.lon_column),
                      off_c = need(config.offense_column);
    if (!missing.empty()) {
        std::string msg = "missing mandatory column(s):";
        for (const auto& m : missing) msg += " " + m;
        throw ConfigError(source + ": " + msg);
    }
    const std::size_t width = std::max({id_c, date_c, lat_c, lon_c, off_c}) + 1;

    CrimeParse out;
    std::vector<std::string> row;
    while (csv::read_record(in, row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        ++out.report.rows_read;
        if (row.size() < width) {
            ++out.report.dropped["short_row"];
            continue;
        }
        const auto date = parse_calendar_date(row[date_c]);
        if (!date) {
            ++out.report.dropped["bad_date"];
            continue;
        }
        const auto lat = parse_double(row[lat_c]);
        const auto lon = parse_double(row[lon_c]);
        if (!lat || !lon || !geo::is_valid({*lon, *lat})) {
            ++out.report.dropped["bad_coord"];
            continue;
        }
        const geo::GeoPoint loc{*lon, *lat};
        if (config.bbox && !config.bbox->contains(loc)) {
            ++out.report.dropped["out_of_bbox"];
            continue;
        }
        if (year_filter && static_cast<int>(date->year()) != *year_filter) {
            ++out.report.filtered_by_year;
            continue;
        }
        out.records.push_back({row[id_c], *date, row[off_c], loc});
    }
    if (in.bad()) throw Error(source + ": read failure");
    out.report.kept = out.records.size();
    return out;
}

} // namespace streetcrime::ingest
