#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "streetcrime/core/parallel.hpp"
#include "streetcrime/core/random.hpp"
#include "streetcrime/geo/containment.hpp"

namespace streetcrime::geo {

// Bucket for records that fall inside no district. No district may use this id.
inline const std::string kUnassigned = "unassigned";

template <class Record>
struct JoinResult {
    std::map<std::string, std::vector<Record>> buckets;  // includes kUnassigned when non-empty
    std::size_t total = 0;

    std::size_t unassigned_count() const {
        auto it = buckets.find(kUnassigned);
        return it == buckets.end() ? 0 : it->second.size();
    }
    double unassigned_fraction() const {
        return total == 0 ? 0.0 : static_cast<double>(unassigned_count()) / static_cast<double>(total);
    }
};

// Checks id uniqueness and the reserved bucket name.
inline void validate_districts(const std::vector<CommunityDistrict>& districts) {
    std::unordered_set<std::string> seen;
    for (const auto& d : districts) {
        if (d.community_id == kUnassigned)
            throw ValidationError("community id '" + kUnassigned + "' is reserved");
        if (!seen.insert(d.community_id).second)
            throw ValidationError("duplicate community id '" + d.community_id + "'");
    }
}

// Index of the containing district, smallest community_id first when several
// contain the point. `order` lists district indices sorted by id.
inline std::optional<std::size_t> find_district(const GeoPoint& p, const std::vector<CommunityDistrict>& districts,
                                                const std::vector<std::size_t>& order) {
    for (std::size_t idx : order)
        if (district_contains(districts[idx], p)) return idx;
    return std::nullopt;
}

inline std::vector<std::size_t> order_by_id(const std::vector<CommunityDistrict>& districts) {
    std::vector<std::size_t> order(districts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return districts[a].community_id < districts[b].community_id; });
    return order;
}

// Assigns every record to exactly one bucket. Within a bucket, records keep
// their input order. `locate` maps a record to its GeoPoint.
template <class Record, class Locate>
JoinResult<Record> spatial_join(const std::vector<Record>& records, const std::vector<CommunityDistrict>& districts,
                                Locate locate, std::size_t threads = 1) {
    validate_districts(districts);
    const auto order = order_by_id(districts);
    std::vector<std::optional<std::size_t>> hit(records.size());
    parallel_for(records.size(), threads,
                 [&](std::size_t i) { hit[i] = find_district(std::invoke(locate, records[i]), districts, order); });
    JoinResult<Record> result;
    result.total = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string& key = hit[i] ? districts[*hit[i]].community_id : kUnassigned;
        result.buckets[key].push_back(records[i]);
    }
    return result;
}

// Labels each sample point with its community (or leaves it empty).
inline std::vector<SamplePoint> assign_communities(std::vector<SamplePoint> points,
                                                   const std::vector<CommunityDistrict>& districts,
                                                   std::size_t threads = 1) {
    validate_districts(districts);
    const auto order = order_by_id(districts);
    parallel_for(points.size(), threads, [&](std::size_t i) {
        const auto idx = find_district(points[i].location, districts, order);
        points[i].community_id = idx ? std::optional(districts[*idx].community_id) : std::nullopt;
    });
    return points;
}

// Uniform sample without replacement of min(n, available) points per
// community. Each community draws from its own SplitMix64 stream seeded by
// derive_seed(seed, community_id), over its points sorted by point_id, so the
// result does not depend on input order. Output is sorted by
// (community_id, point_id). Points without a community are ignored.
inline std::vector<SamplePoint> subsample_per_community(const std::vector<SamplePoint>& points, std::size_t n,
                                                        std::uint64_t seed, std::size_t threads = 1) {
    std::map<std::string, std::vector<const SamplePoint*>> groups;
    for (const auto& p : points)
        if (p.community_id) groups[*p.community_id].push_back(&p);

    std::vector<std::pair<const std::string*, std::vector<const SamplePoint*>*>> work;
    for (auto& [id, members] : groups) work.emplace_back(&id, &members);

    std::vector<std::vector<SamplePoint>> picked(work.size());
    parallel_for(work.size(), threads, [&](std::size_t g) {
        auto& members = *work[g].second;
        std::sort(members.begin(), members.end(),
                  [](const SamplePoint* a, const SamplePoint* b) { return a->point_id < b->point_id; });
        const std::size_t take = std::min(n, members.size());
        SplitMix64 rng(derive_seed(seed, *work[g].first));
        // Partial Fisher-Yates: the first `take` slots become the sample.
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(members.size() - i));
            std::swap(members[i], members[j]);
        }
        picked[g].reserve(take);
        for (std::size_t i = 0; i < take; ++i) picked[g].push_back(*members[i]);
        std::sort(picked[g].begin(), picked[g].end(),
                  [](const SamplePoint& a, const SamplePoint& b) { return a.point_id < b.point_id; });
    });

    std::vector<SamplePoint> out;
    for (auto& group : picked)
        for (auto& p : group) out.push_back(std::move(p));
    return out;
}

// Total centerline length per district in km. Each segment is cut into pieces
// of at most `piece_m` meters and each piece is credited to the district
// containing its midpoint. Length outside every district is dropped.
inline std::map<std::string, double> road_length_by_district(const std::vector<Polyline>& lines,
                                                             const std::vector<CommunityDistrict>& districts,
                                                             double piece_m = 10.0, std::size_t threads = 1) {
    validate_districts(districts);
    const auto order = order_by_id(districts);
    std::vector<std::vector<double>> per_line(lines.size(), std::vector<double>(districts.size(), 0.0));
    parallel_for(lines.size(), threads, [&](std::size_t li) {
        const auto& line = lines[li];
        const auto proj = line.projected();
        for (std::size_t s = 0; s + 1 < proj.size(); ++s) {
            const double len = distance(proj[s], proj[s + 1]);
            const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / piece_m)));
            for (std::size_t k = 0; k < pieces; ++k) {
                const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(pieces);
                const Planar mid{proj[s].x + t * (proj[s + 1].x - proj[s].x), proj[s].y + t * (proj[s + 1].y - proj[s].y)};
                if (auto idx = find_district(unproject_local(mid, line.origin()), districts, order))
                    per_line[li][*idx] += len / static_cast<double>(pieces);
            }
        }
    });
    std::map<std::string, double> km;
    for (const auto& d : districts) km[d.community_id] = 0.0;
    for (const auto& row : per_line)
        for (std::size_t i = 0; i < districts.size(); ++i) km[districts[i].community_id] += row[i] / 1000.0;
    return km;
}

} // namespace streetcrime::geo
