#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vstab/core/warp_field.hpp"
#include "vstab/net/weights.hpp"

namespace vstab::net {

/// Configuration of the dual-branch generator.
///
/// The CNN trunk is an encoder/decoder: an optional stride-1 init block,
/// stride-2 3x3 down blocks, then 2x deconv up blocks with skip
/// concatenation (post-concat channel counts are listed in up_channels).
/// The transformer branch runs one block per fused stage on a fixed token
/// grid of (input_size / patch)^2 tokens; fused stages exchange features
/// both ways (stage input pooled into the tokens, tokens upsampled into the
/// stage output), which reproduces the asymmetric stride pairs of the
/// full-scale layout. Two cascaded passes emit the warp maps for frames t
/// and t+1; the second pass consumes the first pass's decoder features
/// warped by the first map.
struct TUNetConfig {
    Eigen::Index input_size = 256;
    Eigen::Index window_frames = 31;  // frames per temporal sequence; two sequences are stacked

    Eigen::Index init_channels = 32;
    Eigen::Index init_kernel = 5;
    std::vector<Eigen::Index> down_channels;
    std::vector<bool> down_fuse;
    std::vector<Eigen::Index> up_channels;  // post-concat, deepest stage first
    std::vector<bool> up_fuse;

    Eigen::Index patch = 16;
    Eigen::Index embed_dim = 768;
    int heads = 12;
    Eigen::Index mlp_ratio = 4;
    Eigen::Index deconv_kernel = 4;

    /// Paper-scale network: 256x256 input, e=768, m=12, 8 transformer blocks,
    /// seven down and seven up blocks per stage.
    static TUNetConfig full();

    /// Small configuration for tests and CI: 64x64 input, e=96, m=4,
    /// 4 transformer blocks, five down/up blocks.
    static TUNetConfig desk();

    Eigen::Index input_channels() const { return 2 * window_frames * 3; }
    Eigen::Index token_grid() const { return input_size / patch; }
    Eigen::Index tokens() const { return token_grid() * token_grid(); }
    int transformer_blocks() const;

    void validate() const;
};

/// Output spatial shape of every named stage, recorded during a forward pass.
struct StageShape {
    std::string name;
    std::vector<Eigen::Index> shape;
};
using TUNetTrace = std::vector<StageShape>;

struct TUNetOutput {
    WarpField map_t;
    WarpField map_next;
};

/// Ordered parameter list (names, shapes, init rules) for a configuration.
std::vector<WeightInit> tunet_weight_spec(const TUNetConfig& cfg);

/// Seeded deterministic initialization: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
/// for weights and biases, zeros for position bias, identity statistics for
/// batch norm, tau = 1.
WeightStore init_tunet_weights(const TUNetConfig& cfg, std::uint64_t seed);

/// Validates a loaded store against the configuration, naming the first
/// missing or mis-shaped parameter.
void check_tunet_weights(const TUNetConfig& cfg, const WeightStore& w);

/// Forward pass over a (2 * window_frames * 3, S, S) window tensor.
/// Each emitted map is the sum of three heads: the normalized-coordinate
/// grid of the 2x3 affine head, the decoder's dense map, and the reshaped
/// transformer map.
TUNetOutput tunet_forward(const Tensor& window, const TUNetConfig& cfg, const WeightStore& w,
                          TUNetTrace* trace = nullptr);

/// The stage shapes a conforming forward pass must produce (used by the
/// architecture checks and net-check command).
TUNetTrace tunet_expected_trace(const TUNetConfig& cfg);

}  // namespace vstab::net
