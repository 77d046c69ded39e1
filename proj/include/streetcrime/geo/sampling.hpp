#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "streetcrime/geo/geometry.hpp"

namespace streetcrime::geo {

// Lengths within this many meters of an exact multiple of the spacing count as
// reaching it. Absorbs projection round-off on constructed test lines.
inline constexpr double kChainageSlackM = 1e-6;

// Location at `chainage` meters along the line, interpolated linearly in the
// line's projected plane.
inline GeoPoint locate_along(const Polyline& line, double chainage) {
    const auto cum = line.cumulative();
    const auto proj = line.projected();
    chainage = std::clamp(chainage, 0.0, line.length_m());
    auto it = std::upper_bound(cum.begin(), cum.end(), chainage);
    std::size_t seg = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    if (seg >= proj.size() - 1) seg = proj.size() - 2;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0 ? (chainage - cum[seg]) / seg_len : 0.0;
    const Planar q{proj[seg].x + t * (proj[seg + 1].x - proj[seg].x),
                   proj[seg].y + t * (proj[seg + 1].y - proj[seg].y)};
    return unproject_local(q, line.origin());
}

// Points at chainages 0, s, 2s, ..., floor(L/s)*s. A trailing partial step is
// not sampled. Point ids are "<polyline id>#<index>".
inline std::vector<SamplePoint> sample_equidistant(const Polyline& line, double spacing_m) {
    if (!(spacing_m > 0) || !std::isfinite(spacing_m))
        throw ValidationError("sampling spacing must be positive, got " + format_double(spacing_m));
    const double length = line.length_m();
    const auto steps = static_cast<std::size_t>(std::floor((length + kChainageSlackM) / spacing_m));
    std::vector<SamplePoint> out;
    out.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double chainage = std::min(static_cast<double>(k) * spacing_m, length);
        out.push_back({line.id() + "#" + std::to_string(k), locate_along(line, chainage), line.id(), chainage,
                       std::nullopt});
    }
    return out;
}

} // namespace streetcrime::geo
