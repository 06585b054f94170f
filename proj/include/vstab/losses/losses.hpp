#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vstab/core/warp_field.hpp"

namespace vstab::losses {

/// Weights of the total generator objective: alpha scales the shape terms,
/// beta the temporal term. Defaults are 1 and 8.
struct LossWeights {
    double alpha = 1.0;
    double beta = 8.0;
};

/// Lattice of 2D vertex positions with 4-neighbor topology. Grid losses only
/// evaluate interior vertices, so at least 3x3 vertices are required.
class GridMesh {
public:
    GridMesh(Eigen::Index rows, Eigen::Index cols);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    Vec2& at(Eigen::Index r, Eigen::Index c) { return v_[static_cast<std::size_t>(r * cols_ + c)]; }
    const Vec2& at(Eigen::Index r, Eigen::Index c) const {
        return v_[static_cast<std::size_t>(r * cols_ + c)];
    }

    /// Axis-aligned regular lattice with the given origin and spacing.
    static GridMesh regular(Eigen::Index rows, Eigen::Index cols, const Vec2& origin,
                            double spacing);

private:
    Eigen::Index rows_, cols_;
    std::vector<Vec2> v_;
};

/// Mesh of warped positions: the field's normalized (u, v) values sampled on
/// a rows x cols pixel lattice. Default density is 17x17.
GridMesh mesh_from_warp_field(const WarpField& field, Eigen::Index rows = 17,
                              Eigen::Index cols = 17);

/// Optional feature extractor filling the perceptual slot of the content
/// loss. A pretrained backbone is out of scope; any callable mapping a frame
/// to a flat feature vector plugs in here.
using FeatureHook = std::function<Eigen::VectorXd(const Frame&)>;

/// Mean squared error between the two frames, plus the MSE between hook
/// features when a hook is supplied.
double content_loss(const Frame& s, const Frame& p, const FeatureHook& hook = nullptr);

/// Mean L1 distance, in normalized coordinates, between warp-mapped source
/// points (field sampled bilinearly at each p_i) and their targets p'_i.
/// Empty lists return 0.
double points_loss(const WarpField& field, const std::vector<Vec2>& p,
                   const std::vector<Vec2>& p_prime);

/// Opposite-neighbor balance: mean over interior vertices of
/// ||(v_a - v) - (v - v_b)||_1, averaged over the horizontal and vertical
/// neighbor pairs. Zero for any global affine image of a regular lattice.
double relative_grid_loss(const GridMesh& mesh);

/// Same-side neighbor orthogonality: mean over interior vertices of
/// |(v_c - v) . (v_d - v)| with v_c the right and v_d the down neighbor.
/// Zero whenever grid edges stay perpendicular.
double adjacent_grid_loss(const GridMesh& mesh);

/// Mean squared difference between the current frame and the previous frame
/// warped through phi, averaged over pixels and channels.
double temporal_loss(const Frame& p_curr, const Frame& p_prev, const WarpField& phi);

/// Constant target maps the discriminator is scored against: all -1 for
/// predicted frames, all +1 for real stable frames.
struct DiscriminatorTargets {
    ImagePlane predicted;  // all -1
    ImagePlane stable;     // all +1

    static DiscriminatorTargets for_shape(Eigen::Index rows, Eigen::Index cols);
};

/// ||D(P) - (-1)||^2 + ||D(S) - (+1)||^2, each term mean-reduced per element.
double discrimination_loss(const ImagePlane& d_of_p, const ImagePlane& d_of_s);

/// Scalar loss components; generator_total is filled by generator_loss.
struct LossReport {
    double content = 0.0;
    double points = 0.0;
    double relative = 0.0;
    double adjacent = 0.0;
    double temporal = 0.0;
    double generator_total = 0.0;
    double discriminator = 0.0;
};

/// Total generator objective: content + alpha * (points + relative +
/// adjacent) + beta * temporal.
double generator_loss(const LossReport& parts, const LossWeights& w = {});

}  // namespace vstab::losses
