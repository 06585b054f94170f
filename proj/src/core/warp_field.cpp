#include "vstab/core/warp_field.hpp"

#include <cmath>

namespace vstab {

WarpField::WarpField(FieldPlane u, FieldPlane v) : u_(std::move(u)), v_(std::move(v)) {
    validate();
}

void WarpField::validate() const {
    if (u_.rows() != v_.rows() || u_.cols() != v_.cols())
        throw InvalidInputError("WarpField: u/v plane size mismatch");
    if (u_.rows() < 2 || u_.cols() < 2)
        throw InvalidInputError("WarpField: dimensions must be at least 2x2");
    if (!u_.isFinite().all() || !v_.isFinite().all())
        throw InvalidInputError("WarpField: non-finite coordinate");
}

WarpField WarpField::identity(Eigen::Index height, Eigen::Index width) {
    FieldPlane u(height, width), v(height, width);
    for (Eigen::Index x = 0; x < width; ++x)
        u.col(x).setConstant(to_normalized(static_cast<double>(x), width));
    for (Eigen::Index y = 0; y < height; ++y)
        v.row(y).setConstant(to_normalized(static_cast<double>(y), height));
    return WarpField(std::move(u), std::move(v));
}

WarpField affine_to_warp_field(const AffineTransform& a, Eigen::Index height, Eigen::Index width) {
    if (height < 2 || width < 2)
        throw InvalidInputError("affine_to_warp_field: dimensions must be at least 2x2");
    if (!a.matrix().allFinite())
        throw InvalidInputError("affine_to_warp_field: non-finite affine");
    FieldPlane u(height, width), v(height, width);
    const Mat23& m = a.matrix();
    for (Eigen::Index y = 0; y < height; ++y) {
        const double yd = static_cast<double>(y);
        for (Eigen::Index x = 0; x < width; ++x) {
            const double xd = static_cast<double>(x);
            u(y, x) = to_normalized(m(0, 0) * xd + m(0, 1) * yd + m(0, 2), width);
            v(y, x) = to_normalized(m(1, 0) * xd + m(1, 1) * yd + m(1, 2), height);
        }
    }
    return WarpField(std::move(u), std::move(v));
}

WarpField normalized_affine_grid(const Mat23& theta, Eigen::Index height, Eigen::Index width) {
    if (height < 2 || width < 2)
        throw InvalidInputError("normalized_affine_grid: dimensions must be at least 2x2");
    if (!theta.allFinite()) throw InvalidInputError("normalized_affine_grid: non-finite affine");
    FieldPlane u(height, width), v(height, width);
    for (Eigen::Index y = 0; y < height; ++y) {
        const double yn = to_normalized(static_cast<double>(y), height);
        for (Eigen::Index x = 0; x < width; ++x) {
            const double xn = to_normalized(static_cast<double>(x), width);
            u(y, x) = theta(0, 0) * xn + theta(0, 1) * yn + theta(0, 2);
            v(y, x) = theta(1, 0) * xn + theta(1, 1) * yn + theta(1, 2);
        }
    }
    return WarpField(std::move(u), std::move(v));
}

namespace {

template <typename Plane>
double bilinear_sample_impl(const Plane& img, double xs, double ys) {
    const Eigen::Index h = img.rows(), w = img.cols();
    const double xf = std::floor(xs), yf = std::floor(ys);
    const auto x0 = static_cast<Eigen::Index>(xf);
    const auto y0 = static_cast<Eigen::Index>(yf);
    const double ax = xs - xf, ay = ys - yf;

    auto at = [&](Eigen::Index y, Eigen::Index x) -> double {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
        return static_cast<double>(img(y, x));
    };

    const double top = (1.0 - ax) * at(y0, x0) + ax * at(y0, x0 + 1);
    const double bot = (1.0 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1);
    return (1.0 - ay) * top + ay * bot;
}

}  // namespace

float bilinear_sample(const ImagePlane& img, double xs, double ys) {
    return static_cast<float>(bilinear_sample_impl(img, xs, ys));
}

double bilinear_sample(const FieldPlane& img, double xs, double ys) {
    return bilinear_sample_impl(img, xs, ys);
}

Frame apply_warp(const Frame& frame, const WarpField& field) {
    if (frame.height() != field.height() || frame.width() != field.width())
        throw ShapeMismatchError("apply_warp: frame and field dimensions differ");
    const Eigen::Index h = frame.height(), w = frame.width();
    Frame out(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            const double xs = to_pixel(field.u()(y, x), w);
            const double ys = to_pixel(field.v()(y, x), h);
            for (int c = 0; c < Frame::kChannels; ++c)
                out.at(y, x, c) = bilinear_sample(frame.plane(c), xs, ys);
        }
    }
    return out;
}

}  // namespace vstab
