#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/features/aggregate.hpp"
#include "streetcrime/features/crime_rate.hpp"
#include "streetcrime/ingest/schema.hpp"

namespace streetcrime::features {

struct CommunityRow {
    std::string community_id;
    std::vector<double> feature;
    std::size_t n_images = 0;
    std::uint64_t crime_count = 0;
    double crime_rate = 0;

    friend bool operator==(const CommunityRow&, const CommunityRow&) = default;
};

struct Dataset {
    std::vector<CommunityRow> rows;  // sorted by community_id
    ingest::ClassSchema schema;
    RateDenominator rate_denominator = RateDenominator::population;
};

struct Exclusion {
    std::string community_id;
    std::string reason;
};

struct DatasetBuild {
    Dataset dataset;
    std::vector<Exclusion> excluded;  // sorted by community_id
};

inline void validate_row(const CommunityRow& r, std::size_t n_classes, std::optional<AggregationMode> mode) {
    if (r.feature.size() != n_classes)
        throw ValidationError("community '" + r.community_id + "' has " + std::to_string(r.feature.size()) +
                              " features, expected " + std::to_string(n_classes));
    if (!(r.crime_rate >= 0) || !std::isfinite(r.crime_rate))
        throw ValidationError("community '" + r.community_id + "' has invalid crime rate");
    for (double v : r.feature)
        if (!std::isfinite(v)) throw ValidationError("community '" + r.community_id + "' has a non-finite feature");
    if (mode == AggregationMode::pixel_fraction) {
        double sum = 0;
        for (double v : r.feature) {
            if (v < 0 || v > 1) throw ValidationError("community '" + r.community_id + "' fraction outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("community '" + r.community_id + "' fractions do not sum to 1");
    }
}

// Joins features and rates on community id. Communities missing from either
// side, or with no images, are excluded and reported rather than zero-filled.
inline DatasetBuild build_dataset(const std::map<std::string, CommunityFeatures>& features,
                                  const std::map<std::string, CrimeRate>& rates, const ingest::ClassSchema& schema,
                                  RateDenominator denominator, std::optional<AggregationMode> mode = std::nullopt) {
    DatasetBuild out;
    out.dataset.schema = schema;
    out.dataset.rate_denominator = denominator;
    std::set<std::string> ids;
    for (const auto& [id, _] : features) ids.insert(id);
    for (const auto& [id, _] : rates) ids.insert(id);
    for (const auto& id : ids) {
        auto f = features.find(id);
        auto r = rates.find(id);
        if (f == features.end()) {
            out.excluded.push_back({id, "no images"});
        } else if (r == rates.end()) {
            out.excluded.push_back({id, "no crime rate"});
        } else if (f->second.n_images == 0) {
            out.excluded.push_back({id, "no images"});
        } else {
            CommunityRow row{id, f->second.feature, f->second.n_images, r->second.count, r->second.rate};
            validate_row(row, schema.size(), mode);
            out.dataset.rows.push_back(std::move(row));
        }
    }
    if (out.dataset.rows.empty()) throw Error("no community has both image features and a crime rate");
    return out;
}

inline std::vector<std::string> dataset_header(const ingest::ClassSchema& schema) {
    std::vector<std::string> h{"community_id", "n_images", "crime_count", "crime_rate"};
    h.insert(h.end(), schema.classes.begin(), schema.classes.end());
    return h;
}

// Dataset CSV: community_id, n_images, crime_count, crime_rate, then one
// column per class in schema order. Doubles use the shortest round-trip form.
inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
    csv::write_record(out, dataset_header(ds.schema));
    std::vector<std::string> row;
    for (const auto& r : ds.rows) {
        row = {r.community_id, std::to_string(r.n_images), std::to_string(r.crime_count), format_double(r.crime_rate)};
        for (double v : r.feature) row.push_back(format_double(v));
        csv::write_record(out, row);
    }
}

inline Dataset read_dataset_csv(std::istream& in, const std::string& source = "dataset csv") {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) throw ParseError(source, "missing header row");
    csv::strip_bom(header);
    const std::vector<std::string> fixed{"community_id", "n_images", "crime_count", "crime_rate"};
    if (header.size() <= fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin()))
        throw ParseError(source, "header must start with community_id,n_images,crime_count,crime_rate");
    Dataset ds;
    ds.schema.classes.assign(header.begin() + 4, header.end());
    const auto voc = ingest::voc21();
    if (ds.schema.classes == voc.classes)
        ds.schema = voc;
    else
        ds.schema.name = "custom";
    ds.schema.validate();

    std::vector<std::string> row;
    std::size_t line = 1;
    std::set<std::string> seen;
    while (csv::read_record(in, row)) {
        ++line;
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const std::string where = source + ": line " + std::to_string(line);
        if (row.size() != header.size()) throw ParseError(where, "wrong field count");
        CommunityRow r;
        r.community_id = row[0];
        const auto n = parse_integer<std::size_t>(row[1]);
        const auto count = parse_integer<std::uint64_t>(row[2]);
        const auto rate = parse_double(row[3]);
        if (!n || !count || !rate) throw ParseError(where, "bad numeric field");
        r.n_images = *n;
        r.crime_count = *count;
        r.crime_rate = *rate;
        for (std::size_t c = 4; c < row.size(); ++c) {
            const auto v = parse_double(row[c]);
            if (!v) throw ParseError(where, "bad feature value in column '" + header[c] + "'");
            r.feature.push_back(*v);
        }
        if (!seen.insert(r.community_id).second) throw ParseError(where, "duplicate community id");
        if (r.n_images == 0) throw ParseError(where, "row has no images");
        try {
            validate_row(r, ds.schema.size(), std::nullopt);
        } catch (const ValidationError& e) {
            throw ParseError(where, e.what());
        }
        ds.rows.push_back(std::move(r));
    }
    if (ds.rows.empty()) throw ParseError(source, "dataset has no rows");
    return ds;
}

} // namespace streetcrime::features
