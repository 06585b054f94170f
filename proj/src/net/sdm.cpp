#include "vstab/net/sdm.hpp"

#include <cmath>

#include "vstab/net/attention.hpp"
#include "vstab/net/ops.hpp"

namespace vstab::net {

namespace {

void add_linear(std::vector<WeightInit>& spec, const std::string& name, Eigen::Index out_dim,
                Eigen::Index in_dim) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    spec.push_back({name + ".weight", {out_dim, in_dim}, WeightInit::Kind::Uniform, bound});
    spec.push_back({name + ".bias", {out_dim}, WeightInit::Kind::Uniform, bound});
}

void add_norm(std::vector<WeightInit>& spec, const std::string& name, Eigen::Index ch) {
    spec.push_back({name + ".gamma", {ch}, WeightInit::Kind::One, 0.0});
    spec.push_back({name + ".beta", {ch}, WeightInit::Kind::Zero, 0.0});
}

AttentionParams attention_params_from(const WeightStore& w, const std::string& name,
                                      const SDMConfig& cfg) {
    AttentionParams params;
    params.heads = cfg.heads;
    const Tensor& tau = w.get(name + ".attn.tau");
    params.tau.resize(static_cast<std::size_t>(tau.size()));
    for (Eigen::Index i = 0; i < tau.size(); ++i)
        params.tau[static_cast<std::size_t>(i)] = std::max(tau.data()[i], 0.01f);
    const Tensor& pb = w.get(name + ".attn.pos_bias");
    const Eigen::Index n = pb.dim(1);
    for (int h = 0; h < cfg.heads; ++h) {
        Tensor b({n, n});
        b.storage() = pb.storage().segment(h * n * n, n * n);
        params.bias.push_back(std::move(b));
    }
    return params;
}

// Gather one window of tokens into a dense (window^2, E) matrix.
Tensor gather_window(const Tensor& tokens, Eigen::Index grid, Eigen::Index window,
                     Eigen::Index wy, Eigen::Index wx) {
    const Eigen::Index e = tokens.dim(1);
    Tensor out({window * window, e});
    auto src = tokens.matrix(tokens.dim(0), e);
    auto dst = out.matrix(window * window, e);
    for (Eigen::Index iy = 0; iy < window; ++iy)
        for (Eigen::Index ix = 0; ix < window; ++ix)
            dst.row(iy * window + ix) = src.row((wy * window + iy) * grid + wx * window + ix);
    return out;
}

void scatter_window(Tensor& tokens, const Tensor& win, Eigen::Index grid, Eigen::Index window,
                    Eigen::Index wy, Eigen::Index wx) {
    const Eigen::Index e = tokens.dim(1);
    auto dst = tokens.matrix(tokens.dim(0), e);
    auto src = win.matrix(window * window, e);
    for (Eigen::Index iy = 0; iy < window; ++iy)
        for (Eigen::Index ix = 0; ix < window; ++ix)
            dst.row((wy * window + iy) * grid + wx * window + ix) = src.row(iy * window + ix);
}

}  // namespace

void SDMConfig::validate() const {
    if (input_size < 2 || patch < 1 || input_size % patch != 0)
        throw InvalidInputError("SDMConfig: patch must divide input_size");
    if (window < 1 || token_grid() % window != 0)
        throw InvalidInputError("SDMConfig: frame size must be divisible by patch * window");
    if (heads < 1 || embed_dim % heads != 0)
        throw InvalidInputError("SDMConfig: heads must divide embed_dim");
    if (blocks < 1) throw InvalidInputError("SDMConfig: need at least one block");
}

SDMConfig SDMConfig::full() {
    SDMConfig cfg;
    cfg.input_size = 256;
    cfg.patch = 8;
    cfg.embed_dim = 96;
    cfg.heads = 4;
    cfg.blocks = 4;
    cfg.window = 8;
    return cfg;
}

SDMConfig SDMConfig::desk() {
    SDMConfig cfg;
    cfg.input_size = 64;
    cfg.patch = 8;
    cfg.embed_dim = 32;
    cfg.heads = 2;
    cfg.blocks = 2;
    cfg.window = 4;
    return cfg;
}

std::vector<WeightInit> sdm_weight_spec(const SDMConfig& cfg) {
    cfg.validate();
    std::vector<WeightInit> spec;
    const Eigen::Index e = cfg.embed_dim;
    add_linear(spec, "sdm.embed", e, 3 * cfg.patch * cfg.patch);
    for (int b = 0; b < cfg.blocks; ++b) {
        const std::string name = "sdm.block" + std::to_string(b);
        add_linear(spec, name + ".attn.q", e, e);
        add_linear(spec, name + ".attn.k", e, e);
        add_linear(spec, name + ".attn.v", e, e);
        add_linear(spec, name + ".attn.proj", e, e);
        spec.push_back({name + ".attn.tau", {cfg.heads}, WeightInit::Kind::One, 0.0});
        spec.push_back({name + ".attn.pos_bias",
                        {cfg.heads, cfg.window_tokens(), cfg.window_tokens()},
                        WeightInit::Kind::Zero, 0.0});
        add_norm(spec, name + ".ln1", e);
        add_linear(spec, name + ".mlp.fc1", e * cfg.mlp_ratio, e);
        add_linear(spec, name + ".mlp.fc2", e, e * cfg.mlp_ratio);
        add_norm(spec, name + ".ln2", e);
    }
    add_linear(spec, "sdm.head", 1, e);
    return spec;
}

WeightStore init_sdm_weights(const SDMConfig& cfg, std::uint64_t seed) {
    return init_weights_from_spec(sdm_weight_spec(cfg), seed);
}

void check_sdm_weights(const SDMConfig& cfg, const WeightStore& w) {
    std::vector<std::pair<std::string, std::vector<Eigen::Index>>> expected;
    for (const auto& item : sdm_weight_spec(cfg)) expected.emplace_back(item.name, item.shape);
    w.expect(expected);
}

ImagePlane sdm_forward(const Frame& frame, const SDMConfig& cfg, const WeightStore& w) {
    cfg.validate();
    if (frame.height() != cfg.input_size || frame.width() != cfg.input_size)
        throw ShapeMismatchError("sdm_forward: frame size does not match config input size");

    Tensor img({3, cfg.input_size, cfg.input_size});
    for (int c = 0; c < 3; ++c) img.plane(c) = frame.plane(c).matrix();

    Tensor tokens = patch_embed(img, cfg.patch, w.get("sdm.embed.weight"), w.get("sdm.embed.bias"));

    const Eigen::Index grid = cfg.token_grid();
    const Eigen::Index windows = grid / cfg.window;
    for (int b = 0; b < cfg.blocks; ++b) {
        const std::string name = "sdm.block" + std::to_string(b);
        const AttentionParams params = attention_params_from(w, name, cfg);
        Tensor next = tokens;
        for (Eigen::Index wy = 0; wy < windows; ++wy) {
            for (Eigen::Index wx = 0; wx < windows; ++wx) {
                Tensor win = gather_window(tokens, grid, cfg.window, wy, wx);
                Tensor q = linear(win, w.get(name + ".attn.q.weight"), w.get(name + ".attn.q.bias"));
                Tensor k = linear(win, w.get(name + ".attn.k.weight"), w.get(name + ".attn.k.bias"));
                Tensor v = linear(win, w.get(name + ".attn.v.weight"), w.get(name + ".attn.v.bias"));
                Tensor attn = scaled_cosine_attention(q, k, v, params);
                attn = linear(attn, w.get(name + ".attn.proj.weight"),
                              w.get(name + ".attn.proj.bias"));
                Tensor x = layer_norm(add(win, attn), w.get(name + ".ln1.gamma"),
                                      w.get(name + ".ln1.beta"));
                Tensor h = linear(x, w.get(name + ".mlp.fc1.weight"), w.get(name + ".mlp.fc1.bias"));
                h = gelu(std::move(h));
                h = linear(h, w.get(name + ".mlp.fc2.weight"), w.get(name + ".mlp.fc2.bias"));
                x = layer_norm(add(x, h), w.get(name + ".ln2.gamma"), w.get(name + ".ln2.beta"));
                scatter_window(next, x, grid, cfg.window, wy, wx);
            }
        }
        tokens = std::move(next);
    }

    const Tensor scores = linear(tokens, w.get("sdm.head.weight"), w.get("sdm.head.bias"));
    ImagePlane map(grid, grid);
    for (Eigen::Index gy = 0; gy < grid; ++gy)
        for (Eigen::Index gx = 0; gx < grid; ++gx) map(gy, gx) = scores.data()[gy * grid + gx];
    if (!map.isFinite().all()) throw InvalidInputError("sdm_forward: non-finite score map");
    return map;
}

}  // namespace vstab::net
