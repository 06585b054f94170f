#pragma once

#include <vector>

#include "vstab/core/tensor.hpp"

namespace vstab::net {

/// Parameters of scaled cosine attention. tau is a per-head positive scalar
/// dividing the cosine similarities; bias holds one full (tokens x tokens)
/// relative-position bias matrix per head.
struct AttentionParams {
    std::vector<float> tau;    // one per head, > 0
    std::vector<Tensor> bias;  // one (n, n) tensor per head; may be empty for no bias
    int heads = 1;

    void validate(Eigen::Index tokens) const;
};

/// Cosine-similarity matrix between the rows of q and k. Zero-norm rows
/// contribute similarity 0 instead of NaN so degenerate inputs stay finite.
RowMatrixXf cosine_similarity_matrix(const ConstMatrixMap& q, const ConstMatrixMap& k);

/// Scaled cosine attention over (n, e) token matrices:
/// per head, softmax(cos(q_i, k_j) / tau + B_ij) * V, heads concatenated.
/// The embedding dimension must divide evenly into params.heads.
Tensor scaled_cosine_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                               const AttentionParams& params);

}  // namespace vstab::net
