#pragma once

#include "vstab/core/tensor.hpp"
#include "vstab/core/warp_field.hpp"

namespace vstab::net {

/// Square-kernel convolution geometry.
struct ConvSpec {
    Eigen::Index kernel = 3;
    Eigen::Index pad = 1;
    Eigen::Index stride = 1;

    Eigen::Index output_extent(Eigen::Index in) const {
        return (in + 2 * pad - kernel) / stride + 1;
    }
};

/// 2D convolution over a (C, H, W) tensor.
/// weight is (out_ch, in_ch, k, k) flattened, bias is (out_ch).
Tensor conv2d(const Tensor& in, const Tensor& weight, const Tensor& bias, const ConvSpec& spec);

/// Transposed convolution (fractionally strided). weight is
/// (in_ch, out_ch, k, k); output extent is (in - 1) * stride - 2 * pad + k.
Tensor conv_transpose2d(const Tensor& in, const Tensor& weight, const Tensor& bias,
                        const ConvSpec& spec);

/// Average pooling with kernel == stride (exact block means).
Tensor avg_pool(const Tensor& in, Eigen::Index stride);

/// Nearest-neighbor upsampling by an integer factor.
Tensor upsample_nearest(const Tensor& in, Eigen::Index factor);

/// 1x1 convolution used for channel projections. weight (out_ch, in_ch).
Tensor project_channels(const Tensor& in, const Tensor& weight, const Tensor& bias);

Tensor relu(Tensor t);
Tensor gelu(Tensor t);  // exact erf form

Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Inference-mode batch normalization with stored statistics.
Tensor batch_norm(const Tensor& in, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                  const Tensor& variance, double eps = 1e-5);

/// Row-wise affine map of a (N, in) token matrix: out = in * W^T + b.
/// weight (out, in), bias (out).
Tensor linear(const Tensor& tokens, const Tensor& weight, const Tensor& bias);

/// Per-row layer normalization of a (N, E) token matrix.
Tensor layer_norm(const Tensor& tokens, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

/// Numerically stable in-place row-wise softmax.
void softmax_rows_inplace(Eigen::Ref<RowMatrixXf> m);

/// Non-overlapping patch embedding: (C, H, W) -> (N, E) tokens, N = (H/p)*(W/p).
/// Each token is the linear projection of its flattened patch (channel-major,
/// then rows, then columns). weight (E, C*p*p), bias (E).
Tensor patch_embed(const Tensor& in, Eigen::Index patch, const Tensor& weight,
                   const Tensor& bias);

/// Inverse layout helper: tokens (N, E) laid out on a gh x gw grid become an
/// (E, gh, gw) feature map.
Tensor tokens_to_feature_map(const Tensor& tokens, Eigen::Index grid_h, Eigen::Index grid_w);

/// (C, gh, gw) feature map flattened to (gh*gw, C) tokens.
Tensor feature_map_to_tokens(const Tensor& map);

/// Bilinear warp of every channel of a (C, H, W) tensor through a field of
/// matching spatial size (zero padding outside).
Tensor warp_tensor(const Tensor& in, const WarpField& field);

/// Token-grid update half of the fusion module: average-pool the feature map
/// down to the (N, E) token grid, project channels to the embedding dim with
/// a 1x1 convolution, and add. Requires cnn spatial extent / s_down == grid.
Tensor fuse_tokens_from_cnn(const Tensor& tokens, const Tensor& cnn_feat, Eigen::Index s_down,
                            const Tensor& proj_weight, const Tensor& proj_bias);

/// Feature-map update half: upsample the token grid by s_up (nearest),
/// project the embedding to the feature channels, and add. Requires
/// grid * s_up == cnn spatial extent.
Tensor fuse_cnn_from_tokens(const Tensor& cnn_feat, const Tensor& tokens, Eigen::Index s_up,
                            const Tensor& proj_weight, const Tensor& proj_bias);

/// Bidirectional additive fusion between a feature map and a token grid at
/// one resolution: returns the updated (cnn, tokens) pair. Both stride
/// constraints must hold against the same feature map.
std::pair<Tensor, Tensor> hafm_fuse(const Tensor& cnn_feat, const Tensor& tokens,
                                    Eigen::Index s_down, Eigen::Index s_up,
                                    const Tensor& to_cnn_weight, const Tensor& to_cnn_bias,
                                    const Tensor& to_tokens_weight, const Tensor& to_tokens_bias);

}  // namespace vstab::net
