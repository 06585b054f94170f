#include "vstab/net/ops.hpp"

#include <cmath>

namespace vstab::net {

namespace {

using StridedMap =
    Eigen::Map<RowMatrixXf, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using ConstStridedMap =
    Eigen::Map<const RowMatrixXf, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

// View of every `step`-th element of a (rows x cols) plane starting at
// (row0, col0), producing a (vrows x vcols) matrix.
ConstStridedMap strided_view(const float* base, Eigen::Index lda, Eigen::Index row0,
                             Eigen::Index col0, Eigen::Index vrows, Eigen::Index vcols,
                             Eigen::Index step) {
    return ConstStridedMap(base + row0 * lda + col0, vrows, vcols,
                           Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(step * lda, step));
}

StridedMap strided_view_mut(float* base, Eigen::Index lda, Eigen::Index row0, Eigen::Index col0,
                            Eigen::Index vrows, Eigen::Index vcols, Eigen::Index step) {
    return StridedMap(base + row0 * lda + col0, vrows, vcols,
                      Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(step * lda, step));
}

void expect_rank3(const Tensor& t, const char* op) {
    if (t.rank() != 3) throw ShapeMismatchError(std::string(op) + ": expected a (C, H, W) tensor");
}

}  // namespace

Tensor conv2d(const Tensor& in, const Tensor& weight, const Tensor& bias, const ConvSpec& spec) {
    expect_rank3(in, "conv2d");
    if (weight.rank() != 4 || weight.dim(2) != spec.kernel || weight.dim(3) != spec.kernel)
        throw ShapeMismatchError("conv2d: weight shape " + weight.shape_string() +
                                 " does not match kernel spec");
    const Eigen::Index cin = in.dim(0), h = in.dim(1), w = in.dim(2);
    const Eigen::Index cout = weight.dim(0);
    if (weight.dim(1) != cin)
        throw ShapeMismatchError("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                                 " input channels, got " + std::to_string(cin));
    if (bias.size() != cout) throw ShapeMismatchError("conv2d: bias size mismatch");

    const Eigen::Index oh = spec.output_extent(h), ow = spec.output_extent(w);
    if (oh < 1 || ow < 1) throw ShapeMismatchError("conv2d: output would be empty");

    Tensor out({cout, oh, ow});
    const Eigen::Index k = spec.kernel, s = spec.stride, p = spec.pad;
    const float* wptr = weight.data();

    for (Eigen::Index co = 0; co < cout; ++co) {
        auto out_plane = out.plane(co);
        out_plane.setConstant(bias.data()[co]);
        for (Eigen::Index ci = 0; ci < cin; ++ci) {
            const float* base = in.data() + ci * h * w;
            for (Eigen::Index ky = 0; ky < k; ++ky) {
                if (h - 1 - ky + p < 0) continue;
                for (Eigen::Index kx = 0; kx < k; ++kx) {
                    if (w - 1 - kx + p < 0) continue;
                    const float wv = wptr[((co * cin + ci) * k + ky) * k + kx];
                    if (wv == 0.0f) continue;
                    // Output rows where the tap lands inside the input:
                    // 0 <= oy*s + ky - p < h, same for columns.
                    const Eigen::Index oy0 = std::max<Eigen::Index>(
                        0, (p - ky + s - 1) / s);
                    const Eigen::Index ox0 = std::max<Eigen::Index>(
                        0, (p - kx + s - 1) / s);
                    const Eigen::Index oy1 = std::min(oh, (h - 1 - ky + p) / s + 1);
                    const Eigen::Index ox1 = std::min(ow, (w - 1 - kx + p) / s + 1);
                    if (oy0 >= oy1 || ox0 >= ox1) continue;
                    const Eigen::Index iy0 = oy0 * s + ky - p;
                    const Eigen::Index ix0 = ox0 * s + kx - p;
                    out_plane.block(oy0, ox0, oy1 - oy0, ox1 - ox0) +=
                        wv * strided_view(base, w, iy0, ix0, oy1 - oy0, ox1 - ox0, s);
                }
            }
        }
    }
    return out;
}

Tensor conv_transpose2d(const Tensor& in, const Tensor& weight, const Tensor& bias,
                        const ConvSpec& spec) {
    expect_rank3(in, "conv_transpose2d");
    if (weight.rank() != 4 || weight.dim(2) != spec.kernel || weight.dim(3) != spec.kernel)
        throw ShapeMismatchError("conv_transpose2d: weight shape " + weight.shape_string() +
                                 " does not match kernel spec");
    const Eigen::Index cin = in.dim(0), h = in.dim(1), w = in.dim(2);
    const Eigen::Index cout = weight.dim(1);
    if (weight.dim(0) != cin)
        throw ShapeMismatchError("conv_transpose2d: weight expects " +
                                 std::to_string(weight.dim(0)) + " input channels, got " +
                                 std::to_string(cin));
    if (bias.size() != cout) throw ShapeMismatchError("conv_transpose2d: bias size mismatch");

    const Eigen::Index k = spec.kernel, s = spec.stride, p = spec.pad;
    const Eigen::Index oh = (h - 1) * s - 2 * p + k;
    const Eigen::Index ow = (w - 1) * s - 2 * p + k;
    if (oh < 1 || ow < 1) throw ShapeMismatchError("conv_transpose2d: output would be empty");

    Tensor out({cout, oh, ow});
    const float* wptr = weight.data();

    for (Eigen::Index co = 0; co < cout; ++co) {
        auto out_plane = out.plane(co);
        out_plane.setConstant(bias.data()[co]);
        float* obase = out.data() + co * oh * ow;
        for (Eigen::Index ci = 0; ci < cin; ++ci) {
            const auto in_plane = in.plane(ci);
            for (Eigen::Index ky = 0; ky < k; ++ky) {
                if (oh - 1 - ky + p < 0) continue;
                for (Eigen::Index kx = 0; kx < k; ++kx) {
                    if (ow - 1 - kx + p < 0) continue;
                    const float wv = wptr[((ci * cout + co) * k + ky) * k + kx];
                    if (wv == 0.0f) continue;
                    // Input pixel (iy, ix) adds into output (iy*s + ky - p,
                    // ix*s + kx - p); keep the in-bounds input range.
                    const Eigen::Index iy0 = std::max<Eigen::Index>(0, (p - ky + s - 1) / s);
                    const Eigen::Index ix0 = std::max<Eigen::Index>(0, (p - kx + s - 1) / s);
                    const Eigen::Index iy1 = std::min(h, (oh - 1 - ky + p) / s + 1);
                    const Eigen::Index ix1 = std::min(w, (ow - 1 - kx + p) / s + 1);
                    if (iy0 >= iy1 || ix0 >= ix1) continue;
                    strided_view_mut(obase, ow, iy0 * s + ky - p, ix0 * s + kx - p, iy1 - iy0,
                                     ix1 - ix0, s) +=
                        wv * in_plane.block(iy0, ix0, iy1 - iy0, ix1 - ix0);
                }
            }
        }
    }
    return out;
}

Tensor avg_pool(const Tensor& in, Eigen::Index stride) {
    expect_rank3(in, "avg_pool");
    const Eigen::Index c = in.dim(0), h = in.dim(1), w = in.dim(2);
    if (stride < 1 || h % stride != 0 || w % stride != 0)
        throw ShapeMismatchError("avg_pool: extent not divisible by stride " +
                                 std::to_string(stride));
    if (stride == 1) return in;
    const Eigen::Index oh = h / stride, ow = w / stride;
    Tensor out({c, oh, ow});
    const float inv = 1.0f / static_cast<float>(stride * stride);
    for (Eigen::Index ci = 0; ci < c; ++ci) {
        auto out_plane = out.plane(ci);
        out_plane.setZero();
        const float* base = in.data() + ci * h * w;
        for (Eigen::Index dy = 0; dy < stride; ++dy)
            for (Eigen::Index dx = 0; dx < stride; ++dx)
                out_plane += strided_view(base, w, dy, dx, oh, ow, stride);
        out_plane *= inv;
    }
    return out;
}

Tensor upsample_nearest(const Tensor& in, Eigen::Index factor) {
    expect_rank3(in, "upsample_nearest");
    if (factor < 1) throw ShapeMismatchError("upsample_nearest: factor must be positive");
    if (factor == 1) return in;
    const Eigen::Index c = in.dim(0), h = in.dim(1), w = in.dim(2);
    Tensor out({c, h * factor, w * factor});
    for (Eigen::Index ci = 0; ci < c; ++ci) {
        const auto in_plane = in.plane(ci);
        float* obase = out.data() + ci * h * factor * w * factor;
        for (Eigen::Index dy = 0; dy < factor; ++dy)
            for (Eigen::Index dx = 0; dx < factor; ++dx)
                strided_view_mut(obase, w * factor, dy, dx, h, w, factor) = in_plane;
    }
    return out;
}

Tensor project_channels(const Tensor& in, const Tensor& weight, const Tensor& bias) {
    expect_rank3(in, "project_channels");
    if (weight.rank() != 2 || weight.dim(1) != in.dim(0))
        throw ShapeMismatchError("project_channels: weight shape " + weight.shape_string() +
                                 " incompatible with " + in.shape_string());
    const Eigen::Index cout = weight.dim(0);
    if (bias.size() != cout) throw ShapeMismatchError("project_channels: bias size mismatch");
    const Eigen::Index hw = in.dim(1) * in.dim(2);
    Tensor out({cout, in.dim(1), in.dim(2)});
    out.matrix(cout, hw).noalias() = weight.matrix(cout, in.dim(0)) * in.matrix(in.dim(0), hw);
    out.matrix(cout, hw).colwise() += Eigen::Map<const Eigen::VectorXf>(bias.data(), cout);
    return out;
}

Tensor relu(Tensor t) {
    t.storage() = t.storage().cwiseMax(0.0f);
    return t;
}

Tensor gelu(Tensor t) {
    auto& s = t.storage();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double x = static_cast<double>(s(i));
        s(i) = static_cast<float>(0.5 * x * (1.0 + std::erf(x * 0.7071067811865475)));
    }
    return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeMismatchError("add: shapes " + a.shape_string() + " vs " + b.shape_string());
    Tensor out = a;
    out.storage() += b.storage();
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    expect_rank3(a, "concat_channels");
    expect_rank3(b, "concat_channels");
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
        throw ShapeMismatchError("concat_channels: spatial sizes differ");
    Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    out.storage().head(a.size()) = a.storage();
    out.storage().tail(b.size()) = b.storage();
    return out;
}

Tensor batch_norm(const Tensor& in, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                  const Tensor& variance, double eps) {
    expect_rank3(in, "batch_norm");
    const Eigen::Index c = in.dim(0);
    if (gamma.size() != c || beta.size() != c || mean.size() != c || variance.size() != c)
        throw ShapeMismatchError("batch_norm: parameter size mismatch");
    Tensor out = in;
    for (Eigen::Index ci = 0; ci < c; ++ci) {
        const float scale = static_cast<float>(
            static_cast<double>(gamma.data()[ci]) /
            std::sqrt(static_cast<double>(variance.data()[ci]) + eps));
        const float shift = beta.data()[ci] - mean.data()[ci] * scale;
        out.plane(ci) = in.plane(ci) * scale + RowMatrixXf::Constant(in.dim(1), in.dim(2), shift);
    }
    return out;
}

Tensor linear(const Tensor& tokens, const Tensor& weight, const Tensor& bias) {
    if (tokens.rank() != 2) throw ShapeMismatchError("linear: expected (N, in) tokens");
    if (weight.rank() != 2 || weight.dim(1) != tokens.dim(1))
        throw ShapeMismatchError("linear: weight shape " + weight.shape_string() +
                                 " incompatible with " + tokens.shape_string());
    const Eigen::Index n = tokens.dim(0), in_dim = tokens.dim(1), out_dim = weight.dim(0);
    if (bias.size() != out_dim) throw ShapeMismatchError("linear: bias size mismatch");
    Tensor out({n, out_dim});
    out.matrix(n, out_dim).noalias() =
        tokens.matrix(n, in_dim) * weight.matrix(out_dim, in_dim).transpose();
    out.matrix(n, out_dim).rowwise() +=
        Eigen::Map<const Eigen::VectorXf>(bias.data(), out_dim).transpose();
    return out;
}

Tensor layer_norm(const Tensor& tokens, const Tensor& gamma, const Tensor& beta, double eps) {
    if (tokens.rank() != 2) throw ShapeMismatchError("layer_norm: expected (N, E) tokens");
    const Eigen::Index n = tokens.dim(0), e = tokens.dim(1);
    if (gamma.size() != e || beta.size() != e)
        throw ShapeMismatchError("layer_norm: parameter size mismatch");
    Tensor out({n, e});
    auto src = tokens.matrix(n, e);
    auto dst = out.matrix(n, e);
    const auto g = Eigen::Map<const Eigen::VectorXf>(gamma.data(), e);
    const auto b = Eigen::Map<const Eigen::VectorXf>(beta.data(), e);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = src.row(i).cast<double>().mean();
        const double var =
            (src.row(i).cast<double>().array() - mean).square().sum() / static_cast<double>(e);
        const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
        dst.row(i) = ((src.row(i).array() - static_cast<float>(mean)) * inv) * g.transpose().array() +
                     b.transpose().array();
    }
    return out;
}

void softmax_rows_inplace(Eigen::Ref<RowMatrixXf> m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const float mx = m.row(i).maxCoeff();
        m.row(i) = (m.row(i).array() - mx).exp();
        m.row(i) /= m.row(i).sum();
    }
}

Tensor patch_embed(const Tensor& in, Eigen::Index patch, const Tensor& weight,
                   const Tensor& bias) {
    expect_rank3(in, "patch_embed");
    const Eigen::Index c = in.dim(0), h = in.dim(1), w = in.dim(2);
    if (patch < 1 || h % patch != 0 || w % patch != 0)
        throw ShapeMismatchError("patch_embed: spatial extent not divisible by patch size");
    const Eigen::Index gh = h / patch, gw = w / patch, n = gh * gw;
    const Eigen::Index flat = c * patch * patch;
    if (weight.rank() != 2 || weight.dim(1) != flat)
        throw ShapeMismatchError("patch_embed: weight shape " + weight.shape_string() +
                                 " incompatible with patch vector length " + std::to_string(flat));
    const Eigen::Index e = weight.dim(0);
    if (bias.size() != e) throw ShapeMismatchError("patch_embed: bias size mismatch");

    // Gather flattened patches (channel-major, then patch rows, then cols).
    RowMatrixXf patches(n, flat);
    for (Eigen::Index gy = 0; gy < gh; ++gy) {
        for (Eigen::Index gx = 0; gx < gw; ++gx) {
            const Eigen::Index token = gy * gw + gx;
            Eigen::Index k = 0;
            for (Eigen::Index ci = 0; ci < c; ++ci) {
                const auto plane = in.plane(ci);
                for (Eigen::Index py = 0; py < patch; ++py) {
                    patches.row(token).segment(k, patch) =
                        plane.row(gy * patch + py).segment(gx * patch, patch);
                    k += patch;
                }
            }
        }
    }

    Tensor out({n, e});
    out.matrix(n, e).noalias() = patches * weight.matrix(e, flat).transpose();
    out.matrix(n, e).rowwise() += Eigen::Map<const Eigen::VectorXf>(bias.data(), e).transpose();
    return out;
}

Tensor tokens_to_feature_map(const Tensor& tokens, Eigen::Index grid_h, Eigen::Index grid_w) {
    if (tokens.rank() != 2 || tokens.dim(0) != grid_h * grid_w)
        throw ShapeMismatchError("tokens_to_feature_map: token count does not match grid");
    const Eigen::Index n = tokens.dim(0), e = tokens.dim(1);
    Tensor out({e, grid_h, grid_w});
    auto src = tokens.matrix(n, e);
    for (Eigen::Index c = 0; c < e; ++c) {
        auto plane = out.plane(c);
        for (Eigen::Index gy = 0; gy < grid_h; ++gy)
            for (Eigen::Index gx = 0; gx < grid_w; ++gx) plane(gy, gx) = src(gy * grid_w + gx, c);
    }
    return out;
}

Tensor feature_map_to_tokens(const Tensor& map) {
    expect_rank3(map, "feature_map_to_tokens");
    const Eigen::Index c = map.dim(0), h = map.dim(1), w = map.dim(2);
    Tensor out({h * w, c});
    auto dst = out.matrix(h * w, c);
    for (Eigen::Index ci = 0; ci < c; ++ci) {
        const auto plane = map.plane(ci);
        for (Eigen::Index y = 0; y < h; ++y)
            for (Eigen::Index x = 0; x < w; ++x) dst(y * w + x, ci) = plane(y, x);
    }
    return out;
}

namespace {

Eigen::Index token_grid_extent(const Tensor& tokens) {
    if (tokens.rank() != 2) throw ShapeMismatchError("fusion: tokens must be rank 2");
    const auto n = tokens.dim(0);
    const auto g = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (g * g != n) throw ShapeMismatchError("fusion: token count is not a square grid");
    return g;
}

}  // namespace

Tensor fuse_tokens_from_cnn(const Tensor& tokens, const Tensor& cnn_feat, Eigen::Index s_down,
                            const Tensor& proj_weight, const Tensor& proj_bias) {
    expect_rank3(cnn_feat, "fuse_tokens_from_cnn");
    const Eigen::Index g = token_grid_extent(tokens);
    if (cnn_feat.dim(1) != g * s_down || cnn_feat.dim(2) != g * s_down)
        throw ShapeMismatchError("fuse_tokens_from_cnn: feature extent " +
                                 cnn_feat.shape_string() + " does not pool to grid " +
                                 std::to_string(g) + " with stride " + std::to_string(s_down));
    const Tensor pooled = avg_pool(cnn_feat, s_down);
    const Tensor projected = project_channels(pooled, proj_weight, proj_bias);
    return add(tokens, feature_map_to_tokens(projected));
}

Tensor fuse_cnn_from_tokens(const Tensor& cnn_feat, const Tensor& tokens, Eigen::Index s_up,
                            const Tensor& proj_weight, const Tensor& proj_bias) {
    expect_rank3(cnn_feat, "fuse_cnn_from_tokens");
    const Eigen::Index g = token_grid_extent(tokens);
    if (cnn_feat.dim(1) != g * s_up || cnn_feat.dim(2) != g * s_up)
        throw ShapeMismatchError("fuse_cnn_from_tokens: grid " + std::to_string(g) +
                                 " upsampled by " + std::to_string(s_up) +
                                 " does not match feature extent " + cnn_feat.shape_string());
    const Tensor grid_map = tokens_to_feature_map(tokens, g, g);
    const Tensor up = upsample_nearest(grid_map, s_up);
    return add(cnn_feat, project_channels(up, proj_weight, proj_bias));
}

std::pair<Tensor, Tensor> hafm_fuse(const Tensor& cnn_feat, const Tensor& tokens,
                                    Eigen::Index s_down, Eigen::Index s_up,
                                    const Tensor& to_cnn_weight, const Tensor& to_cnn_bias,
                                    const Tensor& to_tokens_weight, const Tensor& to_tokens_bias) {
    Tensor new_cnn = fuse_cnn_from_tokens(cnn_feat, tokens, s_up, to_cnn_weight, to_cnn_bias);
    Tensor new_tokens =
        fuse_tokens_from_cnn(tokens, cnn_feat, s_down, to_tokens_weight, to_tokens_bias);
    return {std::move(new_cnn), std::move(new_tokens)};
}

Tensor warp_tensor(const Tensor& in, const WarpField& field) {
    expect_rank3(in, "warp_tensor");
    if (in.dim(1) != field.height() || in.dim(2) != field.width())
        throw ShapeMismatchError("warp_tensor: field size does not match tensor");
    const Eigen::Index c = in.dim(0), h = in.dim(1), w = in.dim(2);
    Tensor out({c, h, w});
    ImagePlane plane(h, w);
    for (Eigen::Index ci = 0; ci < c; ++ci) {
        plane = Eigen::Map<const ImagePlane>(in.data() + ci * h * w, h, w);
        auto dst = out.plane(ci);
        for (Eigen::Index y = 0; y < h; ++y) {
            for (Eigen::Index x = 0; x < w; ++x) {
                const double xs = to_pixel(static_cast<double>(field.u()(y, x)), w);
                const double ys = to_pixel(static_cast<double>(field.v()(y, x)), h);
                dst(y, x) = bilinear_sample(plane, xs, ys);
            }
        }
    }
    return out;
}

}  // namespace vstab::net
