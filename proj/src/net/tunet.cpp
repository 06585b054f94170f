#include "vstab/net/tunet.hpp"

#include <cmath>

#include "vstab/net/attention.hpp"
#include "vstab/net/ops.hpp"

namespace vstab::net {

namespace {

struct StageDesc {
    std::string name;
    enum class Kind { Init, Down, Up } kind;
    Eigen::Index in_ch = 0, out_ch = 0;
    Eigen::Index in_res = 0, out_res = 0;
    Eigen::Index skip_ch = 0;     // ups: channels of the concatenated skip (0 = none)
    Eigen::Index deconv_ch = 0;   // ups: deconv output channels before concat
    bool fuse = false;
    Eigen::Index s_down = 0, s_up = 0;
    int block = -1;
};

struct PassGeometry {
    std::string prefix;
    Eigen::Index in_ch = 0;
    std::vector<StageDesc> stages;
    Eigen::Index affine_in_ch = 0;  // channels entering the 2x2 affine head
    Eigen::Index final_ch = 0;      // channels of the last up output
};

PassGeometry make_pass(const TUNetConfig& cfg, const std::string& prefix, bool has_init,
                       Eigen::Index in_ch) {
    PassGeometry pass;
    pass.prefix = prefix;
    pass.in_ch = in_ch;

    const Eigen::Index grid = cfg.token_grid();
    const auto downs = cfg.down_channels.size();
    Eigen::Index res = cfg.input_size;
    Eigen::Index ch = in_ch;
    int block = 0;

    auto fuse_strides = [&](StageDesc& d) {
        if (d.in_res % grid != 0 || d.out_res % grid != 0)
            throw InvalidInputError("TUNetConfig: fused stage " + d.name +
                                    " resolutions not divisible by the token grid");
        d.s_down = d.in_res / grid;
        d.s_up = d.out_res / grid;
        d.block = block++;
    };

    if (has_init) {
        StageDesc d;
        d.name = "init";
        d.kind = StageDesc::Kind::Init;
        d.in_ch = ch;
        d.out_ch = cfg.init_channels;
        d.in_res = d.out_res = res;
        pass.stages.push_back(d);
        ch = cfg.init_channels;
    }

    std::vector<Eigen::Index> down_out_ch;
    for (std::size_t i = 0; i < downs; ++i) {
        StageDesc d;
        d.name = "down" + std::to_string(i + 1);
        d.kind = StageDesc::Kind::Down;
        d.in_ch = ch;
        d.out_ch = cfg.down_channels[i];
        d.in_res = res;
        d.out_res = res / 2;
        d.fuse = cfg.down_fuse[i];
        if (d.fuse) fuse_strides(d);
        pass.stages.push_back(d);
        ch = d.out_ch;
        res = d.out_res;
        down_out_ch.push_back(ch);
    }
    if (res != 2)
        throw InvalidInputError("TUNetConfig: down blocks must reduce the input to 2x2, got " +
                                std::to_string(res));
    pass.affine_in_ch = ch;

    const auto ups = cfg.up_channels.size();
    for (std::size_t i = 0; i < ups; ++i) {
        StageDesc d;
        d.name = "up" + std::to_string(ups - i);
        d.kind = StageDesc::Kind::Up;
        d.in_ch = ch;
        d.in_res = res;
        d.out_res = res * 2;
        d.out_ch = cfg.up_channels[i];
        if (i + 2 <= downs && i + 2 <= ups)
            d.skip_ch = down_out_ch[downs - 2 - i];
        else if (i + 1 == ups && has_init)
            d.skip_ch = cfg.init_channels;
        d.deconv_ch = d.out_ch - d.skip_ch;
        if (d.deconv_ch < 1)
            throw InvalidInputError("TUNetConfig: up stage " + d.name +
                                    " target channels below skip width");
        d.fuse = cfg.up_fuse[i];
        if (d.fuse) fuse_strides(d);
        pass.stages.push_back(d);
        ch = d.out_ch;
        res = d.out_res;
    }
    if (res != cfg.input_size)
        throw InvalidInputError("TUNetConfig: up blocks do not restore the input resolution");
    pass.final_ch = ch;
    return pass;
}

void add_conv(std::vector<WeightInit>& spec, const std::string& name, Eigen::Index out_ch,
              Eigen::Index in_ch, Eigen::Index k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * k * k));
    spec.push_back({name + ".weight", {out_ch, in_ch, k, k}, WeightInit::Kind::Uniform, bound});
    spec.push_back({name + ".bias", {out_ch}, WeightInit::Kind::Uniform, bound});
}

void add_deconv(std::vector<WeightInit>& spec, const std::string& name, Eigen::Index in_ch,
                Eigen::Index out_ch, Eigen::Index k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * k * k));
    spec.push_back({name + ".weight", {in_ch, out_ch, k, k}, WeightInit::Kind::Uniform, bound});
    spec.push_back({name + ".bias", {out_ch}, WeightInit::Kind::Uniform, bound});
}

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

void add_batch_norm(std::vector<WeightInit>& spec, const std::string& name, Eigen::Index ch) {
    add_norm(spec, name, ch);
    spec.push_back({name + ".mean", {ch}, WeightInit::Kind::Zero, 0.0});
    spec.push_back({name + ".var", {ch}, WeightInit::Kind::One, 0.0});
}

void add_transformer_block(std::vector<WeightInit>& spec, const std::string& name,
                           const TUNetConfig& cfg, Eigen::Index tokens) {
    const Eigen::Index e = cfg.embed_dim;
    add_linear(spec, name + ".attn.q", e, e);
    add_linear(spec, name + ".attn.k", e, e);
    add_linear(spec, name + ".attn.v", e, e);
    add_linear(spec, name + ".attn.proj", e, e);
    spec.push_back({name + ".attn.tau", {cfg.heads}, WeightInit::Kind::One, 0.0});
    spec.push_back({name + ".attn.pos_bias", {cfg.heads, tokens, tokens},
                    WeightInit::Kind::Zero, 0.0});
    add_norm(spec, name + ".ln1", e);
    add_linear(spec, name + ".mlp.fc1", e * cfg.mlp_ratio, e);
    add_linear(spec, name + ".mlp.fc2", e, e * cfg.mlp_ratio);
    add_norm(spec, name + ".ln2", e);
}

void add_pass_weights(std::vector<WeightInit>& spec, const TUNetConfig& cfg,
                      const PassGeometry& pass) {
    const std::string& p = pass.prefix;
    const Eigen::Index e = cfg.embed_dim;

    add_linear(spec, p + ".embed", e, pass.in_ch * cfg.patch * cfg.patch);

    for (const auto& d : pass.stages) {
        const std::string base = p + "." + d.name;
        if (d.kind == StageDesc::Kind::Init) {
            add_conv(spec, base + ".conv", d.out_ch, d.in_ch, cfg.init_kernel);
            add_conv(spec, base + ".short", d.out_ch, d.in_ch, 1);
        } else if (d.kind == StageDesc::Kind::Down) {
            add_conv(spec, base + ".conv", d.out_ch, d.in_ch, 3);
            add_conv(spec, base + ".short", d.out_ch, d.in_ch, 1);
        } else {
            add_deconv(spec, base + ".deconv", d.in_ch, d.deconv_ch, cfg.deconv_kernel);
        }
        if (d.fuse) {
            add_transformer_block(spec, p + ".trans" + std::to_string(d.block), cfg,
                                  cfg.tokens());
            add_linear(spec, base + ".hafm.to_tokens", e, d.in_ch);
            add_linear(spec, base + ".hafm.to_cnn", d.out_ch, e);
        }
        add_batch_norm(spec, base + ".bn", d.out_ch);
    }

    add_conv(spec, p + ".head_affine.conv", 2 * pass.affine_in_ch, pass.affine_in_ch, 2);
    add_linear(spec, p + ".head_affine.fc", 6, 2 * pass.affine_in_ch);
    add_conv(spec, p + ".head_dense", 2, pass.final_ch, 3);
    add_linear(spec, p + ".head_tokens", 2 * cfg.patch * cfg.patch, e);
}

AttentionParams attention_params_from(const WeightStore& w, const std::string& name,
                                      const TUNetConfig& cfg) {
    AttentionParams params;
    params.heads = cfg.heads;
    const Tensor& tau = w.get(name + ".attn.tau");
    params.tau.resize(static_cast<std::size_t>(tau.size()));
    for (Eigen::Index i = 0; i < tau.size(); ++i)
        params.tau[static_cast<std::size_t>(i)] = std::max(tau.data()[i], 0.01f);  // tau floor
    const Tensor& pb = w.get(name + ".attn.pos_bias");
    const Eigen::Index n = pb.dim(1);
    for (int h = 0; h < cfg.heads; ++h) {
        Tensor b({n, n});
        b.storage() = pb.storage().segment(h * n * n, n * n);
        params.bias.push_back(std::move(b));
    }
    return params;
}

Tensor transformer_block(const Tensor& tokens, const WeightStore& w, const std::string& name,
                         const TUNetConfig& cfg) {
    const AttentionParams params = attention_params_from(w, name, cfg);
    Tensor q = linear(tokens, w.get(name + ".attn.q.weight"), w.get(name + ".attn.q.bias"));
    Tensor k = linear(tokens, w.get(name + ".attn.k.weight"), w.get(name + ".attn.k.bias"));
    Tensor v = linear(tokens, w.get(name + ".attn.v.weight"), w.get(name + ".attn.v.bias"));
    Tensor attn = scaled_cosine_attention(q, k, v, params);
    attn = linear(attn, w.get(name + ".attn.proj.weight"), w.get(name + ".attn.proj.bias"));
    Tensor x = layer_norm(add(tokens, attn), w.get(name + ".ln1.gamma"), w.get(name + ".ln1.beta"));
    Tensor h = linear(x, w.get(name + ".mlp.fc1.weight"), w.get(name + ".mlp.fc1.bias"));
    h = gelu(std::move(h));
    h = linear(h, w.get(name + ".mlp.fc2.weight"), w.get(name + ".mlp.fc2.bias"));
    return layer_norm(add(x, h), w.get(name + ".ln2.gamma"), w.get(name + ".ln2.beta"));
}

struct PassOutput {
    WarpField map;
    Tensor final_features;  // last up output, feeds the second pass
};

void record(TUNetTrace* trace, const std::string& name, std::vector<Eigen::Index> shape) {
    if (trace) trace->push_back({name, std::move(shape)});
}

PassOutput run_pass(const Tensor& input, const TUNetConfig& cfg, const WeightStore& w,
                    const PassGeometry& pass, TUNetTrace* trace) {
    const std::string& p = pass.prefix;
    const Eigen::Index size = cfg.input_size;

    Tensor tokens = patch_embed(input, cfg.patch, w.get(p + ".embed.weight"),
                                w.get(p + ".embed.bias"));
    record(trace, p + ".tokens", {tokens.dim(0), tokens.dim(1)});

    Tensor x = input;
    std::vector<Tensor> skip_candidates;  // init/down outputs in order

    auto run_fusion_and_norm = [&](const StageDesc& d, Tensor y) -> Tensor {
        const std::string base = p + "." + d.name;
        if (d.fuse) {
            tokens = transformer_block(tokens, w, p + ".trans" + std::to_string(d.block), cfg);
            tokens = fuse_tokens_from_cnn(tokens, x, d.s_down,
                                          w.get(base + ".hafm.to_tokens.weight"),
                                          w.get(base + ".hafm.to_tokens.bias"));
            y = fuse_cnn_from_tokens(y, tokens, d.s_up, w.get(base + ".hafm.to_cnn.weight"),
                                     w.get(base + ".hafm.to_cnn.bias"));
        }
        y = batch_norm(y, w.get(base + ".bn.gamma"), w.get(base + ".bn.beta"),
                       w.get(base + ".bn.mean"), w.get(base + ".bn.var"));
        return relu(std::move(y));
    };

    Tensor affine_input;
    for (const auto& d : pass.stages) {
        const std::string base = p + "." + d.name;
        if (d.kind == StageDesc::Kind::Init) {
            const ConvSpec spec{cfg.init_kernel, (cfg.init_kernel - 1) / 2, 1};
            Tensor y = conv2d(x, w.get(base + ".conv.weight"), w.get(base + ".conv.bias"), spec);
            y = add(y, conv2d(x, w.get(base + ".short.weight"), w.get(base + ".short.bias"),
                              ConvSpec{1, 0, 1}));
            y = run_fusion_and_norm(d, std::move(y));
            record(trace, base, {d.out_ch, d.out_res, d.out_res});
            skip_candidates.push_back(y);
            x = std::move(y);
        } else if (d.kind == StageDesc::Kind::Down) {
            Tensor y = conv2d(x, w.get(base + ".conv.weight"), w.get(base + ".conv.bias"),
                              ConvSpec{3, 1, 2});
            y = add(y, conv2d(x, w.get(base + ".short.weight"), w.get(base + ".short.bias"),
                              ConvSpec{1, 0, 2}));
            y = run_fusion_and_norm(d, std::move(y));
            record(trace, base, {d.out_ch, d.out_res, d.out_res});
            skip_candidates.push_back(y);
            x = std::move(y);
            if (&d == &pass.stages[pass.stages.size() - cfg.up_channels.size() - 1])
                affine_input = x;
        } else {
            Tensor y = conv_transpose2d(x, w.get(base + ".deconv.weight"),
                                        w.get(base + ".deconv.bias"),
                                        ConvSpec{cfg.deconv_kernel, (cfg.deconv_kernel - 2) / 2, 2});
            if (d.skip_ch > 0) {
                // Skip partners pair the decoder with the encoder output at
                // the same resolution.
                const Tensor* partner = nullptr;
                for (const auto& s : skip_candidates)
                    if (s.dim(1) == d.out_res && s.dim(0) == d.skip_ch) partner = &s;
                if (!partner)
                    throw ShapeMismatchError("tunet_forward: no skip partner for " + base);
                y = concat_channels(y, *partner);
            }
            y = run_fusion_and_norm(d, std::move(y));
            record(trace, base, {d.out_ch, d.out_res, d.out_res});
            x = std::move(y);
        }
    }

    // Affine head: 2x2 collapse, then a linear layer to the six coefficients.
    Tensor a = conv2d(affine_input, w.get(p + ".head_affine.conv.weight"),
                      w.get(p + ".head_affine.conv.bias"), ConvSpec{2, 0, 1});
    record(trace, p + ".affine_pre", a.shape());
    a = relu(std::move(a));
    Tensor a_flat({Eigen::Index(1), a.size()});
    a_flat.storage() = a.storage();
    const Tensor theta6 =
        linear(a_flat, w.get(p + ".head_affine.fc.weight"), w.get(p + ".head_affine.fc.bias"));
    Mat23 theta;
    theta << theta6.data()[0], theta6.data()[1], theta6.data()[2], theta6.data()[3],
        theta6.data()[4], theta6.data()[5];
    record(trace, p + ".affine", {2, 3});

    // Dense head from the decoder, token head reshaped from the transformer.
    const Tensor dense = conv2d(x, w.get(p + ".head_dense.weight"), w.get(p + ".head_dense.bias"),
                                ConvSpec{3, 1, 1});
    record(trace, p + ".dense_map", dense.shape());

    const Tensor tok_out =
        linear(tokens, w.get(p + ".head_tokens.weight"), w.get(p + ".head_tokens.bias"));
    // Unpatchify: each token holds a (2, patch, patch) block, channel-major.
    Tensor token_map({2, size, size});
    const Eigen::Index grid = cfg.token_grid(), patch = cfg.patch;
    auto tm = tok_out.matrix(tok_out.dim(0), tok_out.dim(1));
    for (Eigen::Index gy = 0; gy < grid; ++gy)
        for (Eigen::Index gx = 0; gx < grid; ++gx) {
            const Eigen::Index token = gy * grid + gx;
            for (Eigen::Index c = 0; c < 2; ++c) {
                auto plane = token_map.plane(c);
                for (Eigen::Index py = 0; py < patch; ++py)
                    plane.row(gy * patch + py).segment(gx * patch, patch) =
                        tm.row(token).segment((c * patch + py) * patch, patch);
            }
        }
    record(trace, p + ".token_map", token_map.shape());

    // The affine head acts on normalized coordinates, so zero weights
    // contribute a zero grid and the three heads sum independently.
    const WarpField grid_field = normalized_affine_grid(theta, size, size);
    FieldPlane u = grid_field.u() + dense.plane(0).array().cast<double>() +
                   token_map.plane(0).array().cast<double>();
    FieldPlane v = grid_field.v() + dense.plane(1).array().cast<double>() +
                   token_map.plane(1).array().cast<double>();
    record(trace, p + ".warp", {2, size, size});

    PassOutput out;
    out.map = WarpField(std::move(u), std::move(v));
    out.final_features = std::move(x);
    return out;
}

}  // namespace

int TUNetConfig::transformer_blocks() const {
    int n = 0;
    for (bool f : down_fuse) n += f ? 1 : 0;
    for (bool f : up_fuse) n += f ? 1 : 0;
    return n;
}

void TUNetConfig::validate() const {
    if (input_size < 4 || (input_size & (input_size - 1)) != 0)
        throw InvalidInputError("TUNetConfig: input_size must be a power of two >= 4");
    if (window_frames < 1) throw InvalidInputError("TUNetConfig: window_frames must be >= 1");
    if (down_channels.size() != down_fuse.size() || up_channels.size() != up_fuse.size())
        throw InvalidInputError("TUNetConfig: fuse flag count mismatch");
    if (down_channels.empty() || up_channels.empty())
        throw InvalidInputError("TUNetConfig: empty stage lists");
    if (patch < 1 || input_size % patch != 0)
        throw InvalidInputError("TUNetConfig: patch must divide input_size");
    if (heads < 1 || embed_dim % heads != 0)
        throw InvalidInputError("TUNetConfig: heads must divide embed_dim");
    if (deconv_kernel != 4)
        throw InvalidInputError("TUNetConfig: only 4x4 deconvolutions are supported");
    // Walking the geometry validates resolutions and channel arithmetic.
    const PassGeometry pass1 = make_pass(*this, "stage1", true, input_channels());
    make_pass(*this, "stage2", false, pass1.final_ch);
}

TUNetConfig TUNetConfig::full() {
    TUNetConfig cfg;
    cfg.input_size = 256;
    cfg.window_frames = 31;
    cfg.init_channels = 32;
    cfg.down_channels = {64, 64, 128, 256, 256, 256, 256};
    cfg.down_fuse = {true, true, true, true, false, false, false};
    cfg.up_channels = {512, 512, 512, 512, 256, 128, 64};
    cfg.up_fuse = {false, false, false, true, true, true, true};
    cfg.patch = 16;
    cfg.embed_dim = 768;
    cfg.heads = 12;
    return cfg;
}

TUNetConfig TUNetConfig::desk() {
    TUNetConfig cfg;
    cfg.input_size = 64;
    cfg.window_frames = 5;
    cfg.init_channels = 16;
    cfg.down_channels = {32, 32, 64, 64, 64};
    cfg.down_fuse = {true, true, false, false, false};
    cfg.up_channels = {128, 128, 96, 64, 32};
    cfg.up_fuse = {false, false, false, true, true};
    cfg.patch = 16;
    cfg.embed_dim = 96;
    cfg.heads = 4;
    return cfg;
}

std::vector<WeightInit> tunet_weight_spec(const TUNetConfig& cfg) {
    cfg.validate();
    std::vector<WeightInit> spec;
    const PassGeometry pass1 = make_pass(cfg, "stage1", true, cfg.input_channels());
    const PassGeometry pass2 = make_pass(cfg, "stage2", false, pass1.final_ch);
    add_pass_weights(spec, cfg, pass1);
    add_pass_weights(spec, cfg, pass2);
    return spec;
}

WeightStore init_tunet_weights(const TUNetConfig& cfg, std::uint64_t seed) {
    return init_weights_from_spec(tunet_weight_spec(cfg), seed);
}

void check_tunet_weights(const TUNetConfig& cfg, const WeightStore& w) {
    std::vector<std::pair<std::string, std::vector<Eigen::Index>>> expected;
    for (const auto& item : tunet_weight_spec(cfg)) expected.emplace_back(item.name, item.shape);
    w.expect(expected);
}

TUNetOutput tunet_forward(const Tensor& window, const TUNetConfig& cfg, const WeightStore& w,
                          TUNetTrace* trace) {
    cfg.validate();
    if (window.rank() != 3 || window.dim(0) != cfg.input_channels() ||
        window.dim(1) != cfg.input_size || window.dim(2) != cfg.input_size)
        throw ShapeMismatchError("tunet_forward: window tensor is " + window.shape_string() +
                                 ", config expects (" + std::to_string(cfg.input_channels()) +
                                 ", " + std::to_string(cfg.input_size) + ", " +
                                 std::to_string(cfg.input_size) + ")");

    const PassGeometry pass1 = make_pass(cfg, "stage1", true, cfg.input_channels());
    const PassGeometry pass2 = make_pass(cfg, "stage2", false, pass1.final_ch);

    PassOutput first = run_pass(window, cfg, w, pass1, trace);

    // The second pass refines from the first pass's decoder features,
    // resampled through the first warp map.
    const Tensor intermediate = warp_tensor(first.final_features, first.map);
    PassOutput second = run_pass(intermediate, cfg, w, pass2, trace);

    first.map.validate();
    second.map.validate();
    return {std::move(first.map), std::move(second.map)};
}

TUNetTrace tunet_expected_trace(const TUNetConfig& cfg) {
    cfg.validate();
    TUNetTrace trace;
    const PassGeometry pass1 = make_pass(cfg, "stage1", true, cfg.input_channels());
    const PassGeometry pass2 = make_pass(cfg, "stage2", false, pass1.final_ch);
    for (const PassGeometry* pass : {&pass1, &pass2}) {
        const std::string& p = pass->prefix;
        trace.push_back({p + ".tokens", {cfg.tokens(), cfg.embed_dim}});
        for (const auto& d : pass->stages)
            trace.push_back({p + "." + d.name, {d.out_ch, d.out_res, d.out_res}});
        trace.push_back({p + ".affine_pre", {2 * pass->affine_in_ch, 1, 1}});
        trace.push_back({p + ".affine", {2, 3}});
        trace.push_back({p + ".dense_map", {2, cfg.input_size, cfg.input_size}});
        trace.push_back({p + ".token_map", {2, cfg.input_size, cfg.input_size}});
        trace.push_back({p + ".warp", {2, cfg.input_size, cfg.input_size}});
    }
    return trace;
}

}  // namespace vstab::net
