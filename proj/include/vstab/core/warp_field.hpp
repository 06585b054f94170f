#pragma once

#include "vstab/core/frame.hpp"
#include "vstab/core/geometry.hpp"

namespace vstab {

/// Corner-aligned pixel <-> normalized coordinate conversion:
/// -1 and +1 are the centers of the first and last pixel.
inline double to_normalized(double pixel, Eigen::Index extent) {
    return 2.0 * pixel / static_cast<double>(extent - 1) - 1.0;
}
inline double to_pixel(double normalized, Eigen::Index extent) {
    return (normalized + 1.0) * 0.5 * static_cast<double>(extent - 1);
}

/// One plane of per-pixel coordinates; double precision so identity and
/// integer-translation fields round-trip exactly through pixel space.
using FieldPlane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel sampling map: entry (y, x) holds the normalized (u, v) source
/// coordinate the output pixel pulls from. Coordinates that land inside the
/// frame lie in [-1, 1]; anything outside samples as black.
class WarpField {
public:
    WarpField() = default;

    /// Takes ownership of the u (x-coordinate) and v (y-coordinate) planes.
    WarpField(FieldPlane u, FieldPlane v);

    /// Field that samples every pixel from itself.
    static WarpField identity(Eigen::Index height, Eigen::Index width);

    Eigen::Index height() const { return u_.rows(); }
    Eigen::Index width() const { return u_.cols(); }
    bool empty() const { return u_.size() == 0; }

    FieldPlane& u() { return u_; }
    FieldPlane& v() { return v_; }
    const FieldPlane& u() const { return u_; }
    const FieldPlane& v() const { return v_; }

    void validate() const;

private:
    FieldPlane u_, v_;
};

/// Warping map of a pixel-space affine: output pixel (x, y) samples the
/// affine image a(x, y), expressed in normalized coordinates.
WarpField affine_to_warp_field(const AffineTransform& a, Eigen::Index height, Eigen::Index width);

/// Warping map of an affine acting directly on normalized coordinates
/// (u, v) = theta * (x_n, y_n, 1). The zero matrix yields the zero field,
/// which makes additive field composition well-behaved.
WarpField normalized_affine_grid(const Mat23& theta, Eigen::Index height, Eigen::Index width);

/// Bilinear sample at pixel coordinates with zero padding outside the image.
float bilinear_sample(const ImagePlane& img, double xs, double ys);
double bilinear_sample(const FieldPlane& img, double xs, double ys);

/// Resample a frame through a warp field of identical dimensions.
/// Out-of-range coordinates produce black, which keeps missing content
/// visible to the crop search.
Frame apply_warp(const Frame& frame, const WarpField& field);

}  // namespace vstab
