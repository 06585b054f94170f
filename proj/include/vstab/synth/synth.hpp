#pragma once

#include <cstdint>
#include <vector>

#include "vstab/core/warp_field.hpp"

namespace vstab::synth {

enum class Texture { Checker, GradientNoise, Sprites };
enum class CameraPath { Static, LinearPan, Sinusoidal };

/// Procedural scene: a textured canvas at least twice the frame size, viewed
/// through a moving viewport. Fully deterministic under the seed.
struct SceneConfig {
    Eigen::Index frame_height = 256;
    Eigen::Index frame_width = 256;
    Eigen::Index canvas_scale = 2;  // canvas = scale x frame size, >= 2
    Texture texture = Texture::Sprites;
    CameraPath path = CameraPath::Static;
    double pan_x = 1.0;  // px/frame, LinearPan
    double pan_y = 0.0;
    double osc_amplitude = 8.0;  // px, Sinusoidal
    double osc_period = 32.0;    // frames
    int frames = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

FrameSequence render_scene(const SceneConfig& cfg);

/// AR(1)-correlated per-frame affine perturbations: translation in pixels,
/// rotation about the frame center in radians, log-scale units. sigma values
/// are the stationary standard deviations; rho is the frame-to-frame
/// correlation. Perturbations are clamped to 3 sigma.
struct JitterModel {
    double translation_sigma = 4.0;
    double rotation_sigma = 0.01;
    double scale_sigma = 0.0;
    double rho = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct JitterResult {
    FrameSequence frames;
    std::vector<AffineTransform> transforms;  // exact per-frame ground truth
};

/// Warps every frame by a sampled affine. The returned transform A_t is the
/// sampling map of the shaken frame: shaken_t(x) = stable_t(A_t(x)), so
/// applying the warp field of A_t^-1 to the shaken frame restores the
/// stable view.
JitterResult inject_jitter(const FrameSequence& seq, const JitterModel& model);

}  // namespace vstab::synth
