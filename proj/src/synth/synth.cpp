#include "vstab/synth/synth.hpp"

#include <cmath>

#include "vstab/core/rng.hpp"

namespace vstab::synth {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Frame make_canvas(const SceneConfig& cfg) {
    const Eigen::Index h = cfg.canvas_scale * cfg.frame_height;
    const Eigen::Index w = cfg.canvas_scale * cfg.frame_width;
    Rng rng(cfg.seed);
    Frame canvas(h, w);

    switch (cfg.texture) {
        case Texture::Checker: {
            // Random per-cell colors keep the corner lattice while making
            // every corner's neighborhood distinctive for matching.
            const Eigen::Index cell = 16;
            const Eigen::Index rows = (h + cell - 1) / cell, cols = (w + cell - 1) / cell;
            std::vector<std::array<float, 3>> colors(static_cast<std::size_t>(rows * cols));
            for (auto& c : colors)
                for (auto& v : c) v = static_cast<float>(rng.uniform(0.05, 0.95));
            for (Eigen::Index y = 0; y < h; ++y)
                for (Eigen::Index x = 0; x < w; ++x) {
                    const auto idx = static_cast<std::size_t>((y / cell) * cols + x / cell);
                    for (int c = 0; c < 3; ++c) canvas.at(y, x, c) = colors[idx][static_cast<std::size_t>(c)];
                }
            break;
        }
        case Texture::GradientNoise: {
            // Sum of a few random low-frequency gratings; smooth and band
            // limited, so resampling round trips cleanly.
            struct Grating {
                double fx, fy, phase, amp;
            };
            std::vector<Grating> gratings;
            for (int k = 0; k < 6; ++k)
                gratings.push_back({rng.uniform(0.3, 3.0) * kTau / static_cast<double>(w),
                                    rng.uniform(0.3, 3.0) * kTau / static_cast<double>(h),
                                    rng.uniform(0.0, kTau), rng.uniform(0.4, 1.0)});
            for (int c = 0; c < 3; ++c) {
                const double channel_phase = rng.uniform(0.0, kTau);
                for (Eigen::Index y = 0; y < h; ++y)
                    for (Eigen::Index x = 0; x < w; ++x) {
                        double v = 0.0, total = 0.0;
                        for (const auto& g : gratings) {
                            v += g.amp * std::sin(g.fx * static_cast<double>(x) +
                                                  g.fy * static_cast<double>(y) + g.phase +
                                                  channel_phase);
                            total += g.amp;
                        }
                        canvas.at(y, x, c) = static_cast<float>(0.5 + 0.4 * v / total);
                    }
            }
            break;
        }
        case Texture::Sprites: {
            // Bright rectangles and discs over a soft gradient background.
            for (Eigen::Index y = 0; y < h; ++y)
                for (Eigen::Index x = 0; x < w; ++x) {
                    canvas.at(y, x, 0) = static_cast<float>(0.15 + 0.2 * double(x) / double(w));
                    canvas.at(y, x, 1) = static_cast<float>(0.15 + 0.2 * double(y) / double(h));
                    canvas.at(y, x, 2) = 0.2f;
                }
            const int sprites = static_cast<int>((h * w) / 2200);
            for (int s = 0; s < sprites; ++s) {
                const bool disc = rng.uniform() < 0.4;
                const double cx = rng.uniform(8.0, static_cast<double>(w - 8));
                const double cy = rng.uniform(8.0, static_cast<double>(h - 8));
                const double half_w = rng.uniform(4.0, 18.0);
                const double half_h = disc ? half_w : rng.uniform(4.0, 18.0);
                std::array<float, 3> color;
                for (auto& v : color) v = static_cast<float>(rng.uniform(0.2, 1.0));
                const auto y0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(cy - half_h - 1)));
                const auto y1 = static_cast<Eigen::Index>(std::min(double(h - 1), std::ceil(cy + half_h + 1)));
                const auto x0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(cx - half_w - 1)));
                const auto x1 = static_cast<Eigen::Index>(std::min(double(w - 1), std::ceil(cx + half_w + 1)));
                for (Eigen::Index y = y0; y <= y1; ++y)
                    for (Eigen::Index x = x0; x <= x1; ++x) {
                        double coverage;
                        if (disc) {
                            const double r = std::hypot(double(x) - cx, double(y) - cy);
                            coverage = std::clamp(half_w - r + 0.5, 0.0, 1.0);
                        } else {
                            const double ex = half_w - std::abs(double(x) - cx) + 0.5;
                            const double ey = half_h - std::abs(double(y) - cy) + 0.5;
                            coverage = std::clamp(ex, 0.0, 1.0) * std::clamp(ey, 0.0, 1.0);
                        }
                        if (coverage <= 0.0) continue;
                        for (int c = 0; c < 3; ++c) {
                            const float base = canvas.at(y, x, c);
                            canvas.at(y, x, c) = static_cast<float>(
                                base + coverage * (color[static_cast<std::size_t>(c)] - base));
                        }
                    }
            }
            break;
        }
    }
    return canvas;
}

Vec2 path_offset(const SceneConfig& cfg, int t) {
    switch (cfg.path) {
        case CameraPath::Static:
            return Vec2::Zero();
        case CameraPath::LinearPan:
            return Vec2(cfg.pan_x * t, cfg.pan_y * t);
        case CameraPath::Sinusoidal: {
            const double w = kTau / cfg.osc_period;
            return Vec2(cfg.osc_amplitude * std::sin(w * t),
                        0.5 * cfg.osc_amplitude * std::sin(2.0 * w * t));
        }
    }
    return Vec2::Zero();
}

}  // namespace

void SceneConfig::validate() const {
    if (frame_height < 2 || frame_width < 2) throw InvalidInputError("SceneConfig: frame too small");
    if (canvas_scale < 2)
        throw InvalidInputError("SceneConfig: canvas must be at least twice the frame size");
    if (frames < 1) throw InvalidInputError("SceneConfig: need at least one frame");
    if (path == CameraPath::Sinusoidal && osc_period <= 0.0)
        throw InvalidInputError("SceneConfig: oscillation period must be positive");
}

FrameSequence render_scene(const SceneConfig& cfg) {
    cfg.validate();
    const Frame canvas = make_canvas(cfg);
    const double margin_x =
        0.5 * static_cast<double>(canvas.width() - cfg.frame_width);
    const double margin_y =
        0.5 * static_cast<double>(canvas.height() - cfg.frame_height);

    FrameSequence seq;
    seq.reserve(static_cast<std::size_t>(cfg.frames));
    for (int t = 0; t < cfg.frames; ++t) {
        const Vec2 off = path_offset(cfg, t);
        const double ox = margin_x + off.x(), oy = margin_y + off.y();
        if (ox < 0.0 || oy < 0.0 || ox + static_cast<double>(cfg.frame_width) > static_cast<double>(canvas.width()) ||
            oy + static_cast<double>(cfg.frame_height) > static_cast<double>(canvas.height()))
            throw InvalidInputError("render_scene: camera path leaves the canvas at frame " +
                                    std::to_string(t + 1));
        Frame f(cfg.frame_height, cfg.frame_width);
        for (int c = 0; c < Frame::kChannels; ++c) {
            const ImagePlane& src = canvas.plane(c);
            ImagePlane& dst = f.plane(c);
            for (Eigen::Index y = 0; y < cfg.frame_height; ++y)
                for (Eigen::Index x = 0; x < cfg.frame_width; ++x)
                    dst(y, x) = bilinear_sample(src, ox + static_cast<double>(x),
                                                oy + static_cast<double>(y));
        }
        seq.push_back(std::move(f));
    }
    return seq;
}

void JitterModel::validate() const {
    if (translation_sigma < 0.0 || rotation_sigma < 0.0 || scale_sigma < 0.0)
        throw InvalidInputError("JitterModel: negative sigma");
    if (rho < 0.0 || rho >= 1.0) throw InvalidInputError("JitterModel: rho must be in [0, 1)");
}

JitterResult inject_jitter(const FrameSequence& seq, const JitterModel& model) {
    model.validate();
    validate_sequence(seq);
    const Eigen::Index h = seq.front().height(), w = seq.front().width();
    const double cx = 0.5 * static_cast<double>(w - 1), cy = 0.5 * static_cast<double>(h - 1);

    Rng rng(model.seed);
    // AR(1) with stationary marginal sigma: innovations scaled by
    // sqrt(1 - rho^2), state initialized at the stationary distribution.
    const double innov = std::sqrt(1.0 - model.rho * model.rho);
    double ex = model.translation_sigma * rng.normal();
    double ey = model.translation_sigma * rng.normal();
    double er = model.rotation_sigma * rng.normal();
    double es = model.scale_sigma * rng.normal();
    auto advance = [&](double state, double sigma) {
        return model.rho * state + innov * sigma * rng.normal();
    };

    JitterResult result;
    result.frames.reserve(seq.size());
    result.transforms.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (t > 0) {
            ex = advance(ex, model.translation_sigma);
            ey = advance(ey, model.translation_sigma);
            er = advance(er, model.rotation_sigma);
            es = advance(es, model.scale_sigma);
        }
        auto clamp3 = [](double v, double sigma) {
            return sigma == 0.0 ? 0.0 : std::clamp(v, -3.0 * sigma, 3.0 * sigma);
        };
        const double dx = clamp3(ex, model.translation_sigma);
        const double dy = clamp3(ey, model.translation_sigma);
        const double rot = clamp3(er, model.rotation_sigma);
        const double scale = std::exp(clamp3(es, model.scale_sigma));

        // Rotation and scale about the frame center, then translation.
        const AffineTransform centered =
            compose(AffineTransform::translation(cx, cy),
                    compose(compose(AffineTransform::rotation(rot),
                                    AffineTransform::scale(scale, scale)),
                            AffineTransform::translation(-cx, -cy)));
        const AffineTransform jitter =
            compose(centered, AffineTransform::translation(dx, dy));

        result.transforms.push_back(jitter);
        result.frames.push_back(apply_warp(seq[t], affine_to_warp_field(jitter, h, w)));
    }
    return result;
}

}  // namespace vstab::synth
