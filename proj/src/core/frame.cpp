#include "vstab/core/frame.hpp"

#include <cmath>
#include <limits>

namespace vstab {

Frame::Frame(Eigen::Index height, Eigen::Index width) {
    if (height < 2 || width < 2) throw InvalidInputError("Frame: dimensions must be at least 2x2");
    for (auto& p : planes_) p = ImagePlane::Zero(height, width);
}

Frame::Frame(ImagePlane r, ImagePlane g, ImagePlane b) {
    planes_[0] = std::move(r);
    planes_[1] = std::move(g);
    planes_[2] = std::move(b);
    validate();
}

void Frame::validate() const {
    const auto h = planes_[0].rows(), w = planes_[0].cols();
    if (h < 2 || w < 2) throw InvalidInputError("Frame: dimensions must be at least 2x2");
    for (const auto& p : planes_) {
        if (p.rows() != h || p.cols() != w) throw InvalidInputError("Frame: plane size mismatch");
        if (!p.isFinite().all()) throw InvalidInputError("Frame: non-finite sample");
        if ((p < 0.0f).any() || (p > 1.0f).any())
            throw InvalidInputError("Frame: sample outside [0, 1]");
    }
}

void validate_sequence(const FrameSequence& seq) {
    if (seq.empty()) throw InvalidInputError("FrameSequence: empty");
    const auto h = seq.front().height(), w = seq.front().width();
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i].height() != h || seq[i].width() != w)
            throw InvalidInputError("FrameSequence: frame " + std::to_string(i) + " size differs");
    }
}

ImagePlane to_gray(const Frame& f) {
    return (f.plane(0) + f.plane(1) + f.plane(2)) * (1.0f / 3.0f);
}

double mse(const Frame& a, const Frame& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeMismatchError("mse: frame dimensions differ");
    double acc = 0.0;
    for (int c = 0; c < Frame::kChannels; ++c)
        acc += (a.plane(c) - b.plane(c)).cast<double>().square().sum();
    return acc / (3.0 * static_cast<double>(a.height()) * static_cast<double>(a.width()));
}

double psnr(const Frame& a, const Frame& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(m);
}

}  // namespace vstab
