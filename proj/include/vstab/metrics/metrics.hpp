#pragma once

#include <vector>

#include "vstab/core/frame.hpp"
#include "vstab/core/geometry.hpp"
#include "vstab/motion/affine_fit.hpp"

namespace vstab::metrics {

/// Stability-score configuration: the tracked vertex grid and the
/// low-frequency band (FFT bins after DC) whose power fraction is scored.
struct StabilityConfig {
    int grid_rows = 4;
    int grid_cols = 4;
    int band_low = 1;
    int band_high = 5;

    void validate() const {
        if (grid_rows < 1 || grid_cols < 1)
            throw InvalidInputError("StabilityConfig: empty vertex grid");
        if (band_low < 1 || band_high < band_low)
            throw InvalidInputError("StabilityConfig: band must start after the DC bin");
    }
};

/// Mean over frames of 1 / sigma_1^2, where sigma_1 is the larger singular
/// value of the homography's 2x2 linear block. 1 means the full field of
/// view is retained. Optional per-frame series output.
double cropping_ratio(const std::vector<Homography>& hs, std::vector<double>* series = nullptr);

/// Minimum over frames of the small/large singular-value ratio of the
/// affine part's linear block (the eigenvalues of its polar symmetric
/// factor), in (0, 1]; 1 means no anisotropic distortion.
double distortion_score(const std::vector<Homography>& hs, std::vector<double>* series = nullptr);

/// One tracked vertex position per frame.
using VertexTrajectory = std::vector<Vec2>;

struct TrajectoryConfig {
    motion::DetectorConfig detector{.max_points = 200};
    motion::MatcherConfig matcher{};
    motion::RansacConfig ransac{};
};

/// Tracks a grid_rows x grid_cols lattice of cell-center vertices through
/// chained inter-frame motion estimates. Pairs that fail estimation fall
/// back to identity; the count is reported through fallback_pairs when
/// given. Requires at least 8 frames.
std::vector<VertexTrajectory> vertex_trajectories(const FrameSequence& seq,
                                                  const StabilityConfig& cfg,
                                                  const TrajectoryConfig& traj_cfg = {},
                                                  int* fallback_pairs = nullptr);

/// Fraction of AC spectral power falling inside the low-frequency band,
/// averaged over vertices and axes. Mirrored FFT bins count toward the band,
/// trajectories are mean-removed first, and an all-constant trajectory
/// scores 1. Requires trajectory length > 2 * band_high.
double stability_score(const std::vector<VertexTrajectory>& trajectories,
                       const StabilityConfig& cfg, std::vector<double>* per_vertex = nullptr);

struct EvalConfig {
    StabilityConfig stability{};
    TrajectoryConfig trajectory{};
    /// InputOutput estimates each frame's homography between the original
    /// and stabilized frame; Consecutive uses successive stabilized frames.
    enum class PairMode { InputOutput, Consecutive } pair_mode = PairMode::InputOutput;
};

struct MetricsReport {
    double cropping = 0.0;
    double distortion = 0.0;
    double stability = 0.0;
    std::vector<double> cropping_series;
    std::vector<double> distortion_series;
    std::vector<double> per_vertex_stability;
    int fallback_pairs = 0;
};

/// Full evaluation: per-frame homographies (estimated from pixel content)
/// feed C and D; grid-vertex trajectories of the stabilized sequence feed S.
MetricsReport evaluate(const FrameSequence& original, const FrameSequence& stabilized,
                       const EvalConfig& cfg = {});

/// Evaluation against analytically known homographies (bypasses motion
/// estimation for C and D).
MetricsReport evaluate_with_homographies(const std::vector<Homography>& hs,
                                         const FrameSequence& stabilized, const EvalConfig& cfg);

}  // namespace vstab::metrics
