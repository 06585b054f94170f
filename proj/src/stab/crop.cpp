#include "vstab/stab/crop.hpp"

#include <cmath>

namespace vstab::stab {

namespace {

struct PixelRect {
    Eigen::Index top = 0, left = 0, height = 0, width = 0;
    Eigen::Index area() const { return height * width; }
};

// Tie-break key: larger area, then smaller top, then smaller left, then
// smaller height. The exhaustive test oracle uses the same ordering.
bool better(const PixelRect& a, const PixelRect& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.top != b.top) return a.top < b.top;
    if (a.left != b.left) return a.left < b.left;
    return a.height < b.height;
}

struct Resampler {
    std::vector<Eigen::Index> x0, y0;
    std::vector<float> ax, ay;
    Eigen::Index out_h, out_w;

    Resampler(Eigen::Index in_h, Eigen::Index in_w, Eigen::Index oh, Eigen::Index ow,
              double px_left, double px_right, double px_top, double px_bottom)
        : out_h(oh), out_w(ow) {
        x0.resize(static_cast<std::size_t>(ow));
        ax.resize(static_cast<std::size_t>(ow));
        for (Eigen::Index j = 0; j < ow; ++j) {
            const double sx =
                px_left + (px_right - px_left) * static_cast<double>(j) / static_cast<double>(ow - 1);
            Eigen::Index xi = static_cast<Eigen::Index>(std::floor(sx));
            xi = std::min(std::max<Eigen::Index>(xi, 0), in_w - 2);
            x0[static_cast<std::size_t>(j)] = xi;
            ax[static_cast<std::size_t>(j)] = static_cast<float>(sx - static_cast<double>(xi));
        }
        y0.resize(static_cast<std::size_t>(oh));
        ay.resize(static_cast<std::size_t>(oh));
        for (Eigen::Index i = 0; i < oh; ++i) {
            const double sy =
                px_top + (px_bottom - px_top) * static_cast<double>(i) / static_cast<double>(oh - 1);
            Eigen::Index yi = static_cast<Eigen::Index>(std::floor(sy));
            yi = std::min(std::max<Eigen::Index>(yi, 0), in_h - 2);
            y0[static_cast<std::size_t>(i)] = yi;
            ay[static_cast<std::size_t>(i)] = static_cast<float>(sy - static_cast<double>(yi));
        }
    }

    // Separable bilinear pass, exact for in-frame coordinates.
    template <typename Plane>
    Plane apply(const Plane& src) const {
        using Scalar = typename Plane::Scalar;
        Plane cols(src.rows(), out_w);
        for (Eigen::Index j = 0; j < out_w; ++j) {
            const Eigen::Index xi = x0[static_cast<std::size_t>(j)];
            const auto a = static_cast<Scalar>(ax[static_cast<std::size_t>(j)]);
            cols.col(j) = (Scalar(1) - a) * src.col(xi) + a * src.col(xi + 1);
        }
        Plane dst(out_h, out_w);
        for (Eigen::Index i = 0; i < out_h; ++i) {
            const Eigen::Index yi = y0[static_cast<std::size_t>(i)];
            const auto a = static_cast<Scalar>(ay[static_cast<std::size_t>(i)]);
            dst.row(i) = (Scalar(1) - a) * cols.row(yi) + a * cols.row(yi + 1);
        }
        return dst;
    }
};

}  // namespace

CropRegion compute_crop_region(const std::vector<WarpField>& fields) {
    std::vector<const WarpField*> ptrs;
    ptrs.reserve(fields.size());
    for (const auto& f : fields) ptrs.push_back(&f);
    return compute_crop_region(ptrs);
}

CropRegion compute_crop_region(const std::vector<const WarpField*>& fields) {
    if (fields.empty()) throw InvalidInputError("compute_crop_region: no fields");
    const Eigen::Index h = fields.front()->height(), w = fields.front()->width();
    for (const auto* f : fields)
        if (f->height() != h || f->width() != w)
            throw InvalidInputError("compute_crop_region: field sizes differ");

    // A pixel is valid when its warped coordinate stays in [-1, 1] in every
    // frame.
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> valid =
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(h, w, true);
    for (const auto* f : fields)
        valid = valid && (f->u().abs() <= 1.0) && (f->v().abs() <= 1.0);

    // Maximal rectangle via the histogram-of-heights stack sweep; every
    // maximal rectangle appears as a popped candidate.
    std::vector<Eigen::Index> heights(static_cast<std::size_t>(w), 0);
    PixelRect best;
    bool found = false;

    for (Eigen::Index row = 0; row < h; ++row) {
        for (Eigen::Index col = 0; col < w; ++col)
            heights[static_cast<std::size_t>(col)] =
                valid(row, col) ? heights[static_cast<std::size_t>(col)] + 1 : 0;

        std::vector<Eigen::Index> stack;  // column indices, heights ascending
        for (Eigen::Index col = 0; col <= w; ++col) {
            const Eigen::Index cur = (col < w) ? heights[static_cast<std::size_t>(col)] : 0;
            while (!stack.empty() && heights[static_cast<std::size_t>(stack.back())] > cur) {
                const Eigen::Index bar = stack.back();
                stack.pop_back();
                const Eigen::Index bar_h = heights[static_cast<std::size_t>(bar)];
                const Eigen::Index left = stack.empty() ? 0 : stack.back() + 1;
                const PixelRect rect{row - bar_h + 1, left, bar_h, col - left};
                if (rect.area() > 0 && (!found || better(rect, best))) {
                    best = rect;
                    found = true;
                }
            }
            if (col < w) stack.push_back(col);
        }
    }

    if (!found) throw NoValidRegionError("compute_crop_region: no pixel valid across all frames");
    if (best.width < 2 || best.height < 2)
        throw NoValidRegionError("compute_crop_region: valid region degenerates to a line");

    CropRegion region;
    region.left = to_normalized(static_cast<double>(best.left), w);
    region.right = to_normalized(static_cast<double>(best.left + best.width - 1), w);
    region.top = to_normalized(static_cast<double>(best.top), h);
    region.bottom = to_normalized(static_cast<double>(best.top + best.height - 1), h);
    region.validate();
    return region;
}

Frame crop_resize(const Frame& frame, const CropRegion& region, Eigen::Index out_h,
                  Eigen::Index out_w) {
    region.validate();
    if (out_h < 2 || out_w < 2) throw InvalidInputError("crop_resize: output must be at least 2x2");
    const Eigen::Index h = frame.height(), w = frame.width();
    const double px_left = to_pixel(region.left, w), px_right = to_pixel(region.right, w);
    const double px_top = to_pixel(region.top, h), px_bottom = to_pixel(region.bottom, h);
    if (px_right - px_left < 1.0 || px_bottom - px_top < 1.0)
        throw InvalidInputError("crop_resize: region narrower than 2 px");

    const Resampler resampler(h, w, out_h, out_w, px_left, px_right, px_top, px_bottom);
    Frame out(out_h, out_w);
    for (int c = 0; c < Frame::kChannels; ++c) out.plane(c) = resampler.apply(frame.plane(c));
    return out;
}

Frame resize_bilinear(const Frame& frame, Eigen::Index out_h, Eigen::Index out_w) {
    if (frame.height() == out_h && frame.width() == out_w) return frame;
    return crop_resize(frame, CropRegion::full(), out_h, out_w);
}

WarpField resize_field(const WarpField& field, Eigen::Index out_h, Eigen::Index out_w) {
    if (field.height() == out_h && field.width() == out_w) return field;
    if (out_h < 2 || out_w < 2) throw InvalidInputError("resize_field: output must be at least 2x2");
    const Eigen::Index h = field.height(), w = field.width();
    const Resampler resampler(h, w, out_h, out_w, 0.0, static_cast<double>(w - 1), 0.0,
                              static_cast<double>(h - 1));
    return WarpField(resampler.apply(field.u()), resampler.apply(field.v()));
}

}  // namespace vstab::stab
