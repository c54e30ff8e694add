#pragma once

#include <span>
#include <vector>

#include "fragility/im/intensity.hpp"

namespace fragility {

/// One (IM, drift) observation for a chosen intensity measure.
struct DemandPoint {
    double im;     ///< g
    double delta;  ///< drift ratio
};

inline std::vector<DemandPoint> project(std::span<const im::DemandRecord> records, im::ImKind kind) {
    std::vector<DemandPoint> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.im.get(kind), r.delta});
    return out;
}

}  // namespace fragility
