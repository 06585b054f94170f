#include "vstab/stab/engine.hpp"

#include <chrono>
#include <deque>
#include <optional>

namespace vstab::stab {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

FrameSequence stabilize_sequence(const FrameSequence& seq, WarpPredictor& predictor,
                                 const SlidingWindowConfig& cfg, EngineDiagnostics* diagnostics,
                                 const WindowObserver& observer) {
    cfg.validate();
    validate_sequence(seq);
    const int n = static_cast<int>(seq.size());
    const int theta = cfg.theta;
    const Eigen::Index out_h = seq.front().height(), out_w = seq.front().width();

    const auto t_start = std::chrono::steady_clock::now();

    // Frames are processed at a fixed size; resize lazily, once per frame.
    FrameSequence resized(seq.size());
    std::vector<bool> resized_ready(seq.size(), false);
    auto resized_at = [&](int idx) -> const Frame& {
        const auto u = static_cast<std::size_t>(idx);
        if (!resized_ready[u]) {
            resized[u] = resize_bilinear(seq[u], cfg.process_height, cfg.process_width);
            resized_ready[u] = true;
        }
        return resized[u];
    };

    // Window initialization: theta slots of frame 1, then frames 1..theta+1
    // clamped to the sequence length.
    std::deque<int> window;
    for (int k = 0; k < theta; ++k) window.push_back(0);
    for (int k = 0; k <= theta; ++k) window.push_back(std::min(k, n - 1));

    std::vector<WarpField> fields;
    fields.reserve(seq.size());
    std::deque<const WarpField*> trailing;
    FrameSequence warped_frames;  // processing-size warped frames
    warped_frames.reserve(seq.size());
    FrameSequence output(seq.size());

    for (int i = 1; i <= n; ++i) {
        // Alg. 2 window advance: future frame when available (and not the
        // first step), otherwise the current frame.
        window.pop_front();
        if (i != 1 && i <= n - theta) window.push_back(i + theta - 1);
        else window.push_back(i - 1);

        std::vector<int> indices(window.begin(), window.end());
        if (observer) observer(i, indices);
        for (int idx : indices) resized_at(idx);

        FrameDiagnostics fd;
        fd.frame = i;

        auto t0 = std::chrono::steady_clock::now();
        fields.push_back(predictor.predict(resized, indices));
        fd.predict_ms = ms_since(t0);
        const WarpField& field = fields.back();
        if (field.height() != cfg.process_height || field.width() != cfg.process_width)
            throw ShapeMismatchError("stabilize_sequence: predictor field size mismatch");

        t0 = std::chrono::steady_clock::now();
        warped_frames.push_back(apply_warp(resized_at(i - 1), field));
        fd.warp_ms = ms_since(t0);

        if (cfg.crop_mode == SlidingWindowConfig::CropMode::Online) {
            // Causal crop: region over the trailing window of fields only.
            trailing.push_back(&fields.back());
            if (static_cast<int>(trailing.size()) > cfg.window_length()) trailing.pop_front();
            t0 = std::chrono::steady_clock::now();
            const CropRegion region =
                compute_crop_region(std::vector<const WarpField*>(trailing.begin(), trailing.end()));
            output[static_cast<std::size_t>(i - 1)] =
                crop_resize(warped_frames.back(), region, out_h, out_w);
            fd.crop_ms = ms_since(t0);
        }

        fd.fallbacks = predictor.fallback_count();
        if (diagnostics) diagnostics->frames.push_back(fd);
    }

    if (cfg.crop_mode == SlidingWindowConfig::CropMode::Global) {
        const auto t0 = std::chrono::steady_clock::now();
        const CropRegion region = compute_crop_region(fields);
        const double crop_ms = ms_since(t0) / static_cast<double>(n);
        for (int i = 0; i < n; ++i) {
            output[static_cast<std::size_t>(i)] =
                crop_resize(warped_frames[static_cast<std::size_t>(i)], region, out_h, out_w);
            if (diagnostics) diagnostics->frames[static_cast<std::size_t>(i)].crop_ms = crop_ms;
        }
    }

    if (diagnostics) {
        diagnostics->total_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        diagnostics->frames_per_second =
            diagnostics->total_seconds > 0.0 ? static_cast<double>(n) / diagnostics->total_seconds
                                             : 0.0;
    }
    return output;
}

}  // namespace vstab::stab
