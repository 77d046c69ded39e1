#pragma once

#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "streetcrime/core/csv.hpp"
#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"
#include "streetcrime/ingest/schema.hpp"

namespace streetcrime::ingest {

// Raw per-image class pixel tally. sum(class_pixels) == total_pixels.
struct ImageFeatureVector {
    std::string image_id;
    std::string point_id;
    std::vector<std::uint64_t> class_pixels;
    std::uint64_t total_pixels = 0;

    friend bool operator==(const ImageFeatureVector&, const ImageFeatureVector&) = default;
};

struct FeatureRowReject {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string reason;
};

struct FeatureParse {
    std::vector<ImageFeatureVector> vectors;
    std::vector<FeatureRowReject> rejected;
};

inline std::vector<std::string> feature_csv_header(const ClassSchema& schema) {
    std::vector<std::string> h{"image_id", "point_id", "total_pixels"};
    h.insert(h.end(), schema.classes.begin(), schema.classes.end());
    return h;
}

// Header must be exactly image_id, point_id, total_pixels, then the schema's
// classes in order; otherwise SchemaMismatchError lists every differing column.
// Rows violating the pixel-sum contract are rejected and counted.
inline FeatureParse parse_feature_csv(std::istream& in, const ClassSchema& schema,
                                      const std::string& source = "feature csv") {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) throw ParseError(source, "missing header row");
    csv::strip_bom(header);
    for (auto& h : header) h = std::string(trim(h));
    const auto expected = feature_csv_header(schema);
    if (header != expected) {
        std::string diff;
        for (std::size_t i = 0; i < std::max(header.size(), expected.size()); ++i) {
            const std::string got = i < header.size() ? header[i] : "<none>";
            const std::string want = i < expected.size() ? expected[i] : "<none>";
            if (got != want) diff += "\n  column " + std::to_string(i + 1) + ": expected '" + want + "', got '" + got + "'";
        }
        throw SchemaMismatchError(source + ": header does not match schema '" + schema.name + "'" + diff);
    }

    FeatureParse out;
    std::vector<std::string> row;
    std::size_t line = 1;
    while (csv::read_record(in, row)) {
        ++line;
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        auto reject = [&](std::string why) { out.rejected.push_back({line, std::move(why)}); };
        if (row.size() != expected.size()) {
            reject("expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(row.size()));
            continue;
        }
        ImageFeatureVector v;
        v.image_id = row[0];
        v.point_id = row[1];
        const auto total = parse_integer<std::uint64_t>(row[2]);
        if (!total || *total == 0) {
            reject("total_pixels must be a positive integer");
            continue;
        }
        v.total_pixels = *total;
        v.class_pixels.reserve(schema.size());
        bool ok = true;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto count = parse_integer<std::uint64_t>(row[3 + c]);
            if (!count) {
                reject("column '" + schema.classes[c] + "' is not a non-negative integer");
                ok = false;
                break;
            }
            v.class_pixels.push_back(*count);
        }
        if (!ok) continue;
        const auto sum = std::accumulate(v.class_pixels.begin(), v.class_pixels.end(), std::uint64_t{0});
        if (sum != v.total_pixels) {
            reject("class pixels sum to " + std::to_string(sum) + ", total_pixels is " + std::to_string(v.total_pixels));
            continue;
        }
        if (v.image_id.empty() || v.point_id.empty()) {
            reject("empty image_id or point_id");
            continue;
        }
        out.vectors.push_back(std::move(v));
    }
    if (in.bad()) throw Error(source + ": read failure");
    return out;
}

inline void write_feature_csv(std::ostream& out, const ClassSchema& schema,
                              const std::vector<ImageFeatureVector>& vectors) {
    csv::write_record(out, feature_csv_header(schema));
    std::vector<std::string> row;
    for (const auto& v : vectors) {
        if (v.class_pixels.size() != schema.size())
            throw ValidationError("feature vector '" + v.image_id + "' has wrong class count");
        row = {v.image_id, v.point_id, std::to_string(v.total_pixels)};
        for (auto c : v.class_pixels) row.push_back(std::to_string(c));
        csv::write_record(out, row);
    }
}

} // namespace streetcrime::ingest
