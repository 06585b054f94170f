#pragma once

#include <cstdint>
#include <vector>

#include "vstab/motion/features.hpp"

namespace vstab::motion {

/// Stacked linear system A * X = B for the six affine coefficients:
/// rows 1..n are [x_i, y_i, 1, 0, 0, 0], rows n+1..2n are [0, 0, 0, x_i, y_i, 1],
/// and the right-hand side is [x'_1 .. x'_n, y'_1 .. y'_n].
struct AffineFitSystem {
    Eigen::MatrixXd design;  // 2n x 6
    Eigen::VectorXd rhs;     // 2n
};

/// Builds the stacked system from n >= 3 correspondences.
AffineFitSystem build_affine_system(const CorrespondenceSet& set);

/// Least-squares minimizer of ||A*X - B||_2, returned as an affine transform.
/// Normal equations with a QR fallback when the system is ill-conditioned;
/// throws DegenerateGeometryError when the design matrix is rank-deficient
/// (collinear source points).
AffineTransform solve_affine_lsq(const AffineFitSystem& system);

struct RansacConfig {
    int iterations = 500;
    double inlier_threshold = 2.0;  // pixels
    int min_inliers = 8;
    std::uint64_t seed = 0;
};

struct RansacResult {
    AffineTransform transform;
    std::vector<bool> inliers;  // per correspondence, against the final model
    int inlier_count = 0;
};

/// Robust affine fit: minimal 3-point hypotheses, consensus scoring, and a
/// final least-squares refit on the consensus set. The returned mask is
/// re-evaluated against the refit model so every flagged inlier satisfies
/// the threshold. Deterministic under a fixed seed.
RansacResult ransac_affine(const CorrespondenceSet& set, const RansacConfig& cfg);

/// Cumulative chain: output[k] = per_pair[k] ∘ ... ∘ per_pair[0].
std::vector<AffineTransform> chain_transforms(const std::vector<AffineTransform>& per_pair);

}  // namespace vstab::motion
