#pragma once

#include <functional>

#include "vstab/stab/predictor.hpp"

namespace vstab::stab {

/// Sliding-window geometry and processing options.
///
/// The window holds 2 * theta + 1 frames. It starts with the first theta
/// slots pinned to frame 1 and the remaining theta + 1 slots holding frames
/// 1 through theta + 1 (clamped to the sequence length). Each step pops the
/// front and appends frame i + theta while one is available and i > 1;
/// otherwise the current frame is appended.
struct SlidingWindowConfig {
    int theta = 15;
    Eigen::Index process_height = 256;
    Eigen::Index process_width = 256;

    /// Global: one crop region over the whole output (offline). Online: the
    /// region is recomputed from the trailing window of fields, keeping
    /// output frame i independent of frames beyond i + theta.
    enum class CropMode { Global, Online } crop_mode = CropMode::Global;

    int window_length() const { return 2 * theta + 1; }

    void validate() const {
        if (theta < 1) throw InvalidInputError("SlidingWindowConfig: theta must be >= 1");
        if (process_height < 2 || process_width < 2)
            throw InvalidInputError("SlidingWindowConfig: processing size too small");
    }
};

struct FrameDiagnostics {
    int frame = 0;         // 1-based, matching the output numbering
    double predict_ms = 0.0;
    double warp_ms = 0.0;
    double crop_ms = 0.0;
    int fallbacks = 0;     // cumulative predictor fallbacks after this frame
};

struct EngineDiagnostics {
    std::vector<FrameDiagnostics> frames;
    double total_seconds = 0.0;
    double frames_per_second = 0.0;
};

/// Called after the window advances for step i (1-based) with the window's
/// frame indices (0-based into the input sequence).
using WindowObserver = std::function<void(int step, std::span<const int> window)>;

/// Online sliding-window stabilization: frames are resized to the processing
/// size, warped by the predictor's field for the current step, cropped to
/// the valid region, and resized back to the input resolution. Output length
/// always equals input length.
FrameSequence stabilize_sequence(const FrameSequence& seq, WarpPredictor& predictor,
                                 const SlidingWindowConfig& cfg,
                                 EngineDiagnostics* diagnostics = nullptr,
                                 const WindowObserver& observer = nullptr);

}  // namespace vstab::stab
