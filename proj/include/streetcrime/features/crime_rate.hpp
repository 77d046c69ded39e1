#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/geo/join.hpp"
#include "streetcrime/ingest/crime_csv.hpp"

namespace streetcrime::features {

enum class RateDenominator { population, area_km2, road_length_km };

inline std::string to_string(RateDenominator d) {
    switch (d) {
        case RateDenominator::population: return "population";
        case RateDenominator::area_km2: return "area_km2";
        case RateDenominator::road_length_km: return "road_length_km";
    }
    return "population";
}

inline RateDenominator parse_rate_denominator(std::string_view s) {
    if (s == "population") return RateDenominator::population;
    if (s == "area_km2") return RateDenominator::area_km2;
    if (s == "road_length_km") return RateDenominator::road_length_km;
    throw ConfigError("unknown rate denominator '" + std::string(s) + "' (population|area_km2|road_length_km)");
}

using PopulationTable = std::map<std::string, double>;

// Two columns with header: community_id,population.
inline PopulationTable read_population_csv(std::istream& in, const std::string& source = "population csv") {
    std::vector<std::string> row;
    if (!csv::read_record(in, row)) throw ParseError(source, "missing header row");
    csv::strip_bom(row);
    if (row.size() < 2 || trim(row[0]) != "community_id" || trim(row[1]) != "population")
        throw ParseError(source, "header must be community_id,population");
    PopulationTable out;
    std::size_t line = 1;
    while (csv::read_record(in, row)) {
        ++line;
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const auto pop = row.size() >= 2 ? parse_double(row[1]) : std::nullopt;
        if (!pop || *pop < 0) throw ParseError(source + ": line " + std::to_string(line), "bad population value");
        if (!out.emplace(std::string(trim(row[0])), *pop).second)
            throw ParseError(source + ": line " + std::to_string(line), "duplicate community id");
    }
    return out;
}

struct CrimeCounts {
    std::map<std::string, std::uint64_t> per_community;  // every district, zero included
    std::size_t unassigned = 0;
};

inline CrimeCounts count_crimes(const std::vector<ingest::CrimeRecord>& records,
                                const std::vector<geo::CommunityDistrict>& districts, std::size_t threads = 1) {
    const auto joined =
        geo::spatial_join(records, districts, [](const ingest::CrimeRecord& r) { return r.location; }, threads);
    CrimeCounts out;
    for (const auto& d : districts) out.per_community[d.community_id] = 0;
    for (const auto& [id, bucket] : joined.buckets) {
        if (id == geo::kUnassigned)
            out.unassigned = bucket.size();
        else
            out.per_community[id] = bucket.size();
    }
    return out;
}

struct CrimeRate {
    std::uint64_t count = 0;
    double denominator = 0;
    double rate = 0;
};

// rate = count / denominator, where the denominator is the community's
// population, area (km^2) or road length (km).
inline std::map<std::string, CrimeRate> compute_crime_rate(const std::map<std::string, std::uint64_t>& counts,
                                                           const std::vector<geo::CommunityDistrict>& districts,
                                                           RateDenominator denominator,
                                                           const std::optional<PopulationTable>& population = {}) {
    std::unordered_map<std::string, const geo::CommunityDistrict*> by_id;
    for (const auto& d : districts) by_id.emplace(d.community_id, &d);
    if (denominator == RateDenominator::population && !population)
        throw ConfigError("rate denominator 'population' requires a population table");

    std::vector<std::string> missing, non_positive;
    std::map<std::string, CrimeRate> out;
    for (const auto& [id, count] : counts) {
        double denom = 0;
        if (denominator == RateDenominator::population) {
            auto it = population->find(id);
            if (it == population->end()) {
                missing.push_back(id);
                continue;
            }
            denom = it->second;
        } else {
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                missing.push_back(id);
                continue;
            }
            denom = denominator == RateDenominator::area_km2 ? it->second->area_km2 : it->second->road_length_km;
        }
        if (!(denom > 0)) {
            non_positive.push_back(id);
            continue;
        }
        out[id] = {count, denom, static_cast<double>(count) / denom};
    }
    auto join = [](const std::vector<std::string>& ids) {
        std::string s;
        for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
        return s;
    };
    if (!missing.empty())
        throw ConfigError("no " + to_string(denominator) + " value for communities: " + join(missing));
    if (!non_positive.empty())
        throw ConfigError(to_string(denominator) + " is not positive for communities: " + join(non_positive));
    return out;
}

} // namespace streetcrime::features
