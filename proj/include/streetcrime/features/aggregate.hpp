#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/geo/geometry.hpp"
#include "streetcrime/ingest/feature_csv.hpp"

namespace streetcrime::features {

enum class AggregationMode { pixel_fraction, image_presence };

inline std::string to_string(AggregationMode m) {
    return m == AggregationMode::pixel_fraction ? "pixel_fraction" : "image_presence";
}

inline AggregationMode parse_aggregation_mode(std::string_view s) {
    if (s == "pixel_fraction") return AggregationMode::pixel_fraction;
    if (s == "image_presence") return AggregationMode::image_presence;
    throw ConfigError("unknown aggregation mode '" + std::string(s) + "' (pixel_fraction|image_presence)");
}

// Integer tallies over a batch of images. Tallies of disjoint batches merge
// exactly, so aggregation is independent of image order and partitioning.
struct ImageTally {
    std::vector<std::uint64_t> class_pixels;    // summed per class
    std::vector<std::uint64_t> images_present;  // images with class_pixels > threshold
    std::uint64_t total_pixels = 0;
    std::size_t n_images = 0;

    explicit ImageTally(std::size_t n_classes = 0) : class_pixels(n_classes, 0), images_present(n_classes, 0) {}

    void add(const ingest::ImageFeatureVector& v, std::uint64_t presence_threshold) {
        if (v.class_pixels.size() != class_pixels.size())
            throw ValidationError("image '" + v.image_id + "' has " + std::to_string(v.class_pixels.size()) +
                                  " classes, expected " + std::to_string(class_pixels.size()));
        for (std::size_t c = 0; c < class_pixels.size(); ++c) {
            class_pixels[c] += v.class_pixels[c];
            if (v.class_pixels[c] > presence_threshold) ++images_present[c];
        }
        total_pixels += v.total_pixels;
        ++n_images;
    }

    ImageTally& merge(const ImageTally& other) {
        if (other.class_pixels.size() != class_pixels.size()) throw ValidationError("tally class counts differ");
        for (std::size_t c = 0; c < class_pixels.size(); ++c) {
            class_pixels[c] += other.class_pixels[c];
            images_present[c] += other.images_present[c];
        }
        total_pixels += other.total_pixels;
        n_images += other.n_images;
        return *this;
    }

    // pixel_fraction: summed class pixels over summed total pixels.
    // image_presence: fraction of images where the class exceeds the threshold.
    std::vector<double> feature(AggregationMode mode) const {
        std::vector<double> f(class_pixels.size(), 0.0);
        if (n_images == 0) return f;
        for (std::size_t c = 0; c < f.size(); ++c) {
            f[c] = mode == AggregationMode::pixel_fraction
                       ? static_cast<double>(class_pixels[c]) / static_cast<double>(total_pixels)
                       : static_cast<double>(images_present[c]) / static_cast<double>(n_images);
        }
        return f;
    }
};

inline ImageTally tally_images(std::span<const ingest::ImageFeatureVector> images, std::size_t n_classes,
                               std::uint64_t presence_threshold = 0) {
    ImageTally t(n_classes);
    for (const auto& v : images) t.add(v, presence_threshold);
    return t;
}

struct CommunityFeatures {
    std::vector<double> feature;
    std::size_t n_images = 0;
};

using GroupedImages = std::map<std::string, std::vector<ingest::ImageFeatureVector>>;

inline std::map<std::string, CommunityFeatures> aggregate_features(const GroupedImages& grouped,
                                                                   std::size_t n_classes, AggregationMode mode,
                                                                   std::uint64_t presence_threshold = 0) {
    std::map<std::string, CommunityFeatures> out;
    for (const auto& [id, images] : grouped) {
        const auto t = tally_images(images, n_classes, presence_threshold);
        out[id] = {t.feature(mode), t.n_images};
    }
    return out;
}

struct GroupingReport {
    std::size_t unknown_point = 0;    // point_id not among the sample points
    std::size_t no_community = 0;     // point carries no community
};

// Routes each image to the community of its sample point.
inline GroupedImages group_by_community(const std::vector<ingest::ImageFeatureVector>& vectors,
                                        const std::vector<geo::SamplePoint>& points, GroupingReport* report = nullptr) {
    std::unordered_map<std::string, const geo::SamplePoint*> by_id;
    for (const auto& p : points) by_id.emplace(p.point_id, &p);
    GroupedImages out;
    GroupingReport r;
    for (const auto& v : vectors) {
        auto it = by_id.find(v.point_id);
        if (it == by_id.end()) {
            ++r.unknown_point;
        } else if (!it->second->community_id) {
            ++r.no_community;
        } else {
            out[*it->second->community_id].push_back(v);
        }
    }
    if (report) *report = r;
    return out;
}

} // namespace streetcrime::features
