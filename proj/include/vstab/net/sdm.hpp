#pragma once

#include "vstab/core/frame.hpp"
#include "vstab/net/weights.hpp"

namespace vstab::net {

/// Discriminator configuration: patch embedding followed by blocks of
/// non-overlapping windowed scaled-cosine attention, then a per-token linear
/// head producing a real-valued score map over the patch grid.
struct SDMConfig {
    Eigen::Index input_size = 256;
    Eigen::Index patch = 8;
    Eigen::Index embed_dim = 96;
    int heads = 4;
    int blocks = 4;
    Eigen::Index window = 8;  // tokens per window side; bias is (window^2)^2 per head
    Eigen::Index mlp_ratio = 4;

    static SDMConfig full();
    static SDMConfig desk();

    Eigen::Index token_grid() const { return input_size / patch; }
    Eigen::Index window_tokens() const { return window * window; }

    void validate() const;
};

std::vector<WeightInit> sdm_weight_spec(const SDMConfig& cfg);
WeightStore init_sdm_weights(const SDMConfig& cfg, std::uint64_t seed);
void check_sdm_weights(const SDMConfig& cfg, const WeightStore& w);

/// Forward pass: returns the (grid x grid) score map compared against the
/// all -1 / all +1 target maps by the discrimination loss.
ImagePlane sdm_forward(const Frame& frame, const SDMConfig& cfg, const WeightStore& w);

}  // namespace vstab::net
