#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "vstab/core/error.hpp"

namespace vstab {

/// One image plane; row index is y, column index is x.
using ImagePlane = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An RGB frame with intensities in [0, 1].
///
/// 8-bit sources are converted by division by 255 at the I/O boundary so the
/// loss formulas operate on continuous values.
class Frame {
public:
    static constexpr int kChannels = 3;

    Frame() = default;

    /// Zero (black) frame of the given size.
    Frame(Eigen::Index height, Eigen::Index width);

    /// Takes ownership of three equally sized planes; validates contents.
    Frame(ImagePlane r, ImagePlane g, ImagePlane b);

    Eigen::Index height() const { return planes_[0].rows(); }
    Eigen::Index width() const { return planes_[0].cols(); }
    bool empty() const { return planes_[0].size() == 0; }

    ImagePlane& plane(int c) { return planes_[static_cast<std::size_t>(c)]; }
    const ImagePlane& plane(int c) const { return planes_[static_cast<std::size_t>(c)]; }

    float& at(Eigen::Index y, Eigen::Index x, int c) { return plane(c)(y, x); }
    float at(Eigen::Index y, Eigen::Index x, int c) const { return plane(c)(y, x); }

    /// Throws InvalidInputError unless all samples are finite, inside [0, 1],
    /// and the frame is at least 2x2 with equal plane sizes.
    void validate() const;

private:
    std::array<ImagePlane, 3> planes_;
};

/// Ordered frames with uniform dimensions.
using FrameSequence = std::vector<Frame>;

/// Throws unless the sequence is nonempty and every frame matches the first.
void validate_sequence(const FrameSequence& seq);

/// Channel-mean luminance plane.
ImagePlane to_gray(const Frame& f);

/// Peak signal-to-noise ratio in dB against a unit peak. Identical frames
/// return +infinity.
double psnr(const Frame& a, const Frame& b);

/// Mean squared error over all samples of both frames.
double mse(const Frame& a, const Frame& b);

}  // namespace vstab
