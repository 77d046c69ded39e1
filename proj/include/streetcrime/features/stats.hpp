#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/core/table.hpp"
#include "streetcrime/features/dataset.hpp"
#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::features {

struct SummaryStats {
    double mean = 0;
    double stdv = 0;  // sample standard deviation; 0 for a single value
    double min = 0;
    double max = 0;
};

inline SummaryStats summarize(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("cannot summarize an empty column");
    SummaryStats s;
    double sum = 0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stdv = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

struct StatsRow {
    std::string variable;
    std::string description;
    SummaryStats stats;
    int decimals = 2;  // for the text table
};

struct StatsTable {
    std::vector<StatsRow> rows;
};

// Community area, road length, crime count and crime rate over the dataset's
// communities.
inline StatsTable descriptive_stats(const Dataset& ds, const std::vector<geo::CommunityDistrict>& districts) {
    if (ds.rows.empty()) throw ValidationError("descriptive stats need a non-empty dataset");
    std::unordered_map<std::string, const geo::CommunityDistrict*> by_id;
    for (const auto& d : districts) by_id.emplace(d.community_id, &d);
    std::vector<double> area, road, count, rate;
    for (const auto& r : ds.rows) {
        auto it = by_id.find(r.community_id);
        if (it == by_id.end()) throw ValidationError("no district for community '" + r.community_id + "'");
        area.push_back(it->second->area_km2);
        road.push_back(it->second->road_length_km);
        count.push_back(static_cast<double>(r.crime_count));
        rate.push_back(r.crime_rate);
    }
    return {{{"Community Area (km2)", "Total area", summarize(area), 2},
             {"Road Length (km)", "Total road length", summarize(road), 2},
             {"Crime Count", "Total reported crimes", summarize(count), 2},
             {"Crime Rate", "Rate of crimes", summarize(rate), 5}}};
}

inline const std::vector<std::string> kStatsColumns{"Variable", "Description", "Mean", "Stdv", "Min", "Max"};

inline void write_stats_text(std::ostream& out, const StatsTable& t) {
    std::vector<std::vector<std::string>> cells{kStatsColumns};
    for (const auto& r : t.rows)
        cells.push_back({r.variable, r.description, format_fixed(r.stats.mean, r.decimals),
                         format_fixed(r.stats.stdv, r.decimals), format_fixed(r.stats.min, r.decimals),
                         format_fixed(r.stats.max, r.decimals)});
    write_aligned(out, cells, 2);
}

inline void write_stats_csv(std::ostream& out, const StatsTable& t) {
    csv::write_record(out, kStatsColumns);
    for (const auto& r : t.rows)
        csv::write_record(out, {r.variable, r.description, format_double(r.stats.mean), format_double(r.stats.stdv),
                                format_double(r.stats.min), format_double(r.stats.max)});
}

} // namespace streetcrime::features
