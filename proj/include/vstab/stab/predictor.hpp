#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "vstab/motion/affine_fit.hpp"
#include "vstab/net/tunet.hpp"
#include "vstab/stab/crop.hpp"

namespace vstab::stab {

/// Produces the warp field for the window's center frame. `indices` holds
/// the window's positions within `frames` (duplicates are normal at sequence
/// boundaries); the returned field matches the frames' processing size.
/// Predictors may keep per-video caches, so use one instance per sequence.
class WarpPredictor {
public:
    virtual ~WarpPredictor() = default;
    virtual WarpField predict(const FrameSequence& frames, std::span<const int> indices) = 0;
    virtual std::string name() const = 0;
    /// Cumulative count of motion-estimation failures that fell back to
    /// identity (diagnostics only).
    virtual int fallback_count() const { return 0; }
};

/// Pass-through predictor; useful as a pipeline baseline.
class IdentityPredictor : public WarpPredictor {
public:
    WarpField predict(const FrameSequence& frames, std::span<const int> indices) override;
    std::string name() const override { return "identity"; }
};

/// Affine between two frames estimated from detected corners, patch
/// matching, and the robust fit; std::nullopt when any step fails.
std::optional<AffineTransform> estimate_pair_affine(const Frame& a, const Frame& b,
                                                    const motion::DetectorConfig& detector,
                                                    const motion::MatcherConfig& matcher,
                                                    const motion::RansacConfig& ransac);

/// Gaussian smoothing of a trajectory of affine transforms, coefficient by
/// coefficient, with the kernel renormalized at the boundaries.
std::vector<AffineTransform> gaussian_smooth_trajectory(
    const std::vector<AffineTransform>& trajectory, double sigma);

struct ClassicalConfig {
    double smoothing_sigma = 8.0;
    motion::DetectorConfig detector{.max_points = 200};
    motion::MatcherConfig matcher{};
    motion::RansacConfig ransac{};
};

/// Trajectory-smoothing baseline: estimates pairwise affines across the
/// window, chains them into a camera trajectory, Gaussian-smooths every
/// coefficient, and warps the center frame onto its smoothed pose. Pairs
/// that fail motion estimation fall back to identity and are counted.
class ClassicalPredictor : public WarpPredictor {
public:
    explicit ClassicalPredictor(ClassicalConfig cfg = {}) : cfg_(std::move(cfg)) {}

    WarpField predict(const FrameSequence& frames, std::span<const int> indices) override;
    std::string name() const override { return "classical"; }
    int fallback_count() const override { return fallbacks_; }

private:
    const AffineTransform& pair_affine(const FrameSequence& frames, int ia, int ib);

    ClassicalConfig cfg_;
    std::map<std::pair<int, int>, AffineTransform> cache_;
    int fallbacks_ = 0;
};

/// Uncached single-window form of the classical predictor.
WarpField classical_predict(const std::vector<Frame>& window, double smoothing_sigma);

/// Adapter running the generator network on the sliding window. Builds the
/// two temporal sequences (the second shifted one frame ahead, last frame
/// repeated at the boundary), and averages the overlapping map emitted for
/// the same frame by the previous step.
class TUNetPredictor : public WarpPredictor {
public:
    TUNetPredictor(net::TUNetConfig cfg, net::WeightStore weights);

    WarpField predict(const FrameSequence& frames, std::span<const int> indices) override;
    std::string name() const override { return "tunet"; }

private:
    net::TUNetConfig cfg_;
    net::WeightStore weights_;
    std::optional<WarpField> pending_next_;  // map for the frame after the last center
};

}  // namespace vstab::stab
