#include "vstab/net/attention.hpp"

#include "vstab/net/ops.hpp"

#include <cmath>

namespace vstab::net {

void AttentionParams::validate(Eigen::Index tokens) const {
    if (heads < 1) throw InvalidInputError("AttentionParams: heads must be >= 1");
    if (static_cast<int>(tau.size()) != heads)
        throw ShapeMismatchError("AttentionParams: tau count != heads");
    for (const float t : tau)
        if (!(t > 0.0f) || !std::isfinite(t))
            throw InvalidInputError("AttentionParams: tau must be positive and finite");
    if (!bias.empty()) {
        if (static_cast<int>(bias.size()) != heads)
            throw ShapeMismatchError("AttentionParams: bias count != heads");
        for (const auto& b : bias) {
            if (b.rank() != 2 || b.dim(0) != tokens || b.dim(1) != tokens)
                throw ShapeMismatchError("AttentionParams: bias must be (tokens, tokens), got " +
                                         b.shape_string());
            b.validate_finite("attention bias");
        }
    }
}

RowMatrixXf cosine_similarity_matrix(const ConstMatrixMap& q, const ConstMatrixMap& k) {
    if (q.cols() != k.cols()) throw ShapeMismatchError("cosine_similarity_matrix: dim mismatch");

    RowMatrixXf qn = q, kn = k;
    for (Eigen::Index i = 0; i < qn.rows(); ++i) {
        const float norm = qn.row(i).norm();
        if (norm > 0.0f) qn.row(i) /= norm;
        else qn.row(i).setZero();
    }
    for (Eigen::Index j = 0; j < kn.rows(); ++j) {
        const float norm = kn.row(j).norm();
        if (norm > 0.0f) kn.row(j) /= norm;
        else kn.row(j).setZero();
    }
    return qn * kn.transpose();
}

Tensor scaled_cosine_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                               const AttentionParams& params) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2)
        throw ShapeMismatchError("scaled_cosine_attention: expected (tokens, dim) inputs");
    if (q.dim(1) != k.dim(1) || k.dim(0) != v.dim(0) || k.dim(1) != v.dim(1))
        throw ShapeMismatchError("scaled_cosine_attention: inconsistent token shapes");
    const Eigen::Index nq = q.dim(0), nk = k.dim(0), e = q.dim(1);
    if (e % params.heads != 0)
        throw ShapeMismatchError("scaled_cosine_attention: heads must divide the embedding dim");
    params.validate(nk);
    if (!params.bias.empty() && nq != nk)
        throw ShapeMismatchError("scaled_cosine_attention: bias requires equal query/key counts");

    const Eigen::Index hd = e / params.heads;
    Tensor out({nq, e});
    auto qm = q.matrix(nq, e), km = k.matrix(nk, e), vm = v.matrix(nk, e);
    auto om = out.matrix(nq, e);

    for (int h = 0; h < params.heads; ++h) {
        const Eigen::Index off = h * hd;
        // Head columns are interleaved in the row-major (n, e) layout, so
        // copy the head slice out before normalizing.
        RowMatrixXf qslice = qm.block(0, off, nq, hd);
        RowMatrixXf kslice = km.block(0, off, nk, hd);
        RowMatrixXf logits = cosine_similarity_matrix(
            ConstMatrixMap(qslice.data(), nq, hd), ConstMatrixMap(kslice.data(), nk, hd));
        logits /= params.tau[static_cast<std::size_t>(h)];
        if (!params.bias.empty())
            logits += params.bias[static_cast<std::size_t>(h)].matrix(nk, nk);
        softmax_rows_inplace(logits);
        om.block(0, off, nq, hd).noalias() = logits * vm.block(0, off, nk, hd);
    }
    return out;
}

}  // namespace vstab::net
