#pragma once

#include <vector>

#include "vstab/core/frame.hpp"
#include "vstab/core/geometry.hpp"

namespace vstab::motion {

/// One matched point pair: p in the source frame, p' in the target frame.
struct Correspondence {
    Vec2 source;
    Vec2 target;
};

/// Ordered list of matches between two frames.
class CorrespondenceSet {
public:
    CorrespondenceSet() = default;
    explicit CorrespondenceSet(std::vector<Correspondence> items);

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const Correspondence& operator[](std::size_t i) const { return items_[i]; }
    const std::vector<Correspondence>& items() const { return items_; }
    void push_back(const Correspondence& c);

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<Correspondence> items_;
};

struct DetectorConfig {
    int max_points = 300;
    /// Keep responses above this fraction of the strongest response.
    double relative_threshold = 0.01;
    /// Ignore a border this wide (also covers the descriptor patch radius).
    int margin = 5;
};

/// Shi-Tomasi corner detection: min-eigenvalue score of the smoothed
/// structure tensor, 3x3 non-max suppression, parabolic subpixel refinement.
/// Sorted by response strength (ties by y then x); deterministic.
/// A constant frame has no gradients and yields an empty list.
std::vector<Vec2> detect_features(const Frame& frame, int max_points);
std::vector<Vec2> detect_features(const Frame& frame, const DetectorConfig& cfg);

struct MatcherConfig {
    int patch_radius = 4;
    /// Lowe-style ratio test on NCC-derived distances.
    double ratio = 0.8;
    /// Reject matches whose best correlation falls below this.
    double min_correlation = 0.5;
};

/// One-to-one matches by normalized cross-correlation of grayscale patches
/// with a ratio test; no duplicate targets. Points too close to a border to
/// carry a full patch are skipped.
CorrespondenceSet match_features(const std::vector<Vec2>& points_a, const Frame& frame_a,
                                 const std::vector<Vec2>& points_b, const Frame& frame_b,
                                 const MatcherConfig& cfg = {});

}  // namespace vstab::motion
