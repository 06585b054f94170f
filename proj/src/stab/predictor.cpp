#include "vstab/stab/predictor.hpp"

#include <cmath>

#include "vstab/net/ops.hpp"

namespace vstab::stab {

WarpField IdentityPredictor::predict(const FrameSequence& frames, std::span<const int> indices) {
    if (indices.empty()) throw InvalidInputError("IdentityPredictor: empty window");
    const Frame& f = frames[static_cast<std::size_t>(indices[indices.size() / 2])];
    return WarpField::identity(f.height(), f.width());
}

std::optional<AffineTransform> estimate_pair_affine(const Frame& a, const Frame& b,
                                                    const motion::DetectorConfig& detector,
                                                    const motion::MatcherConfig& matcher,
                                                    const motion::RansacConfig& ransac) {
    try {
        const auto pa = motion::detect_features(a, detector);
        const auto pb = motion::detect_features(b, detector);
        if (pa.empty() || pb.empty()) return std::nullopt;
        const auto matches = motion::match_features(pa, a, pb, b, matcher);
        if (matches.size() < static_cast<std::size_t>(std::max(ransac.min_inliers, 3)))
            return std::nullopt;
        return motion::ransac_affine(matches, ransac).transform;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<AffineTransform> gaussian_smooth_trajectory(
    const std::vector<AffineTransform>& trajectory, double sigma) {
    if (trajectory.empty()) throw InvalidInputError("gaussian_smooth_trajectory: empty trajectory");
    if (sigma <= 0.0) return trajectory;
    const auto n = static_cast<Eigen::Index>(trajectory.size());
    std::vector<AffineTransform> out;
    out.reserve(trajectory.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec6 acc = Vec6::Zero();
        double total = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = static_cast<double>(j - i);
            const double wgt = std::exp(-d * d / (2.0 * sigma * sigma));
            acc += wgt * trajectory[static_cast<std::size_t>(j)].coefficients();
            total += wgt;
        }
        out.push_back(AffineTransform::from_coefficients(acc / total));
    }
    return out;
}

const AffineTransform& ClassicalPredictor::pair_affine(const FrameSequence& frames, int ia,
                                                       int ib) {
    static const AffineTransform kIdentity;
    if (ia == ib) return kIdentity;
    const auto key = std::make_pair(ia, ib);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    auto estimate = estimate_pair_affine(frames[static_cast<std::size_t>(ia)],
                                         frames[static_cast<std::size_t>(ib)], cfg_.detector,
                                         cfg_.matcher, cfg_.ransac);
    if (!estimate) {
        ++fallbacks_;
        estimate = AffineTransform::identity();
    }
    return cache_.emplace(key, *estimate).first->second;
}

WarpField ClassicalPredictor::predict(const FrameSequence& frames, std::span<const int> indices) {
    if (indices.empty()) throw InvalidInputError("ClassicalPredictor: empty window");
    const std::size_t center = indices.size() / 2;
    const Frame& center_frame = frames[static_cast<std::size_t>(indices[center])];
    const Eigen::Index h = center_frame.height(), w = center_frame.width();

    // Camera trajectory across the window: slot j's pose relative to slot 0.
    std::vector<AffineTransform> trajectory;
    trajectory.reserve(indices.size());
    trajectory.push_back(AffineTransform::identity());
    for (std::size_t j = 0; j + 1 < indices.size(); ++j) {
        const AffineTransform& step = pair_affine(frames, indices[j], indices[j + 1]);
        trajectory.push_back(compose(step, trajectory.back()));
    }

    const auto smoothed = gaussian_smooth_trajectory(trajectory, cfg_.smoothing_sigma);
    // Sampling transform: the warp that moves the center frame onto its
    // smoothed pose is smoothed ∘ raw⁻¹; the field samples with its inverse.
    try {
        const AffineTransform sampling = compose(trajectory[center], smoothed[center].inverse());
        return affine_to_warp_field(sampling, h, w);
    } catch (const SingularMatrixError&) {
        ++fallbacks_;
        return WarpField::identity(h, w);
    }
}

WarpField classical_predict(const std::vector<Frame>& window, double smoothing_sigma) {
    if (window.empty()) throw InvalidInputError("classical_predict: empty window");
    ClassicalConfig cfg;
    cfg.smoothing_sigma = smoothing_sigma;
    ClassicalPredictor predictor(cfg);
    std::vector<int> indices(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) indices[i] = static_cast<int>(i);
    return predictor.predict(window, indices);
}

TUNetPredictor::TUNetPredictor(net::TUNetConfig cfg, net::WeightStore weights)
    : cfg_(std::move(cfg)), weights_(std::move(weights)) {
    cfg_.validate();
    net::check_tunet_weights(cfg_, weights_);
}

WarpField TUNetPredictor::predict(const FrameSequence& frames, std::span<const int> indices) {
    const auto window_len = static_cast<Eigen::Index>(indices.size());
    if (window_len != cfg_.window_frames)
        throw ShapeMismatchError("TUNetPredictor: window length " + std::to_string(window_len) +
                                 " does not match configured " +
                                 std::to_string(cfg_.window_frames));
    const Frame& center_frame = frames[static_cast<std::size_t>(indices[indices.size() / 2])];

    // Two temporal sequences stacked along channels: the window itself and
    // the window shifted one frame ahead (last frame repeated).
    const Eigen::Index s = cfg_.input_size;
    Tensor input({cfg_.input_channels(), s, s});
    Eigen::Index channel = 0;
    auto push_frame = [&](int idx) {
        const Frame resized = resize_bilinear(frames[static_cast<std::size_t>(idx)], s, s);
        for (int c = 0; c < Frame::kChannels; ++c)
            input.plane(channel++) = resized.plane(c).matrix();
    };
    for (Eigen::Index j = 0; j < window_len; ++j) push_frame(indices[static_cast<std::size_t>(j)]);
    for (Eigen::Index j = 1; j < window_len; ++j) push_frame(indices[static_cast<std::size_t>(j)]);
    push_frame(indices[static_cast<std::size_t>(window_len - 1)]);

    net::TUNetOutput out = net::tunet_forward(input, cfg_, weights_);

    WarpField current = std::move(out.map_t);
    if (pending_next_) {
        // The previous step already produced a map for this frame; average
        // the overlap.
        FieldPlane u = 0.5 * (current.u() + pending_next_->u());
        FieldPlane v = 0.5 * (current.v() + pending_next_->v());
        current = WarpField(std::move(u), std::move(v));
    }
    pending_next_ = std::move(out.map_next);

    return resize_field(current, center_frame.height(), center_frame.width());
}

}  // namespace vstab::stab
