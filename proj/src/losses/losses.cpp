#include "vstab/losses/losses.hpp"

#include <cmath>

namespace vstab::losses {

GridMesh::GridMesh(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {
    if (rows < 3 || cols < 3)
        throw InvalidInputError("GridMesh: need at least 3x3 vertices for interior neighbors");
    v_.assign(static_cast<std::size_t>(rows * cols), Vec2::Zero());
}

GridMesh GridMesh::regular(Eigen::Index rows, Eigen::Index cols, const Vec2& origin,
                           double spacing) {
    GridMesh m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m.at(r, c) = origin + Vec2(spacing * static_cast<double>(c),
                                       spacing * static_cast<double>(r));
    return m;
}

GridMesh mesh_from_warp_field(const WarpField& field, Eigen::Index rows, Eigen::Index cols) {
    GridMesh m(rows, cols);
    const Eigen::Index h = field.height(), w = field.width();
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto y = static_cast<Eigen::Index>(
            std::llround(static_cast<double>(r) * static_cast<double>(h - 1) / static_cast<double>(rows - 1)));
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto x = static_cast<Eigen::Index>(
                std::llround(static_cast<double>(c) * static_cast<double>(w - 1) / static_cast<double>(cols - 1)));
            m.at(r, c) = Vec2(field.u()(y, x), field.v()(y, x));
        }
    }
    return m;
}

double content_loss(const Frame& s, const Frame& p, const FeatureHook& hook) {
    double loss = mse(s, p);
    if (hook) {
        const Eigen::VectorXd fs = hook(s);
        const Eigen::VectorXd fp = hook(p);
        if (fs.size() != fp.size())
            throw ShapeMismatchError("content_loss: feature hook output sizes differ");
        if (fs.size() > 0) loss += (fs - fp).squaredNorm() / static_cast<double>(fs.size());
    }
    return loss;
}

double points_loss(const WarpField& field, const std::vector<Vec2>& p,
                   const std::vector<Vec2>& p_prime) {
    if (p.size() != p_prime.size()) throw ShapeMismatchError("points_loss: point list sizes differ");
    if (p.empty()) return 0.0;

    const Eigen::Index h = field.height(), w = field.width();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double u = bilinear_sample(field.u(), p[i].x(), p[i].y());
        const double v = bilinear_sample(field.v(), p[i].x(), p[i].y());
        const double tu = to_normalized(p_prime[i].x(), w);
        const double tv = to_normalized(p_prime[i].y(), h);
        acc += std::abs(u - tu) + std::abs(v - tv);
    }
    return acc / static_cast<double>(p.size());
}

double relative_grid_loss(const GridMesh& mesh) {
    double acc = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index r = 1; r + 1 < mesh.rows(); ++r) {
        for (Eigen::Index c = 1; c + 1 < mesh.cols(); ++c) {
            const Vec2& v = mesh.at(r, c);
            const Vec2 horizontal = (mesh.at(r, c - 1) - v) - (v - mesh.at(r, c + 1));
            const Vec2 vertical = (mesh.at(r - 1, c) - v) - (v - mesh.at(r + 1, c));
            acc += 0.5 * (horizontal.lpNorm<1>() + vertical.lpNorm<1>());
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

double adjacent_grid_loss(const GridMesh& mesh) {
    double acc = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index r = 1; r + 1 < mesh.rows(); ++r) {
        for (Eigen::Index c = 1; c + 1 < mesh.cols(); ++c) {
            const Vec2& v = mesh.at(r, c);
            const Vec2 right = mesh.at(r, c + 1) - v;
            const Vec2 down = mesh.at(r + 1, c) - v;
            acc += std::abs(right.dot(down));
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

double temporal_loss(const Frame& p_curr, const Frame& p_prev, const WarpField& phi) {
    if (p_curr.height() != p_prev.height() || p_curr.width() != p_prev.width())
        throw ShapeMismatchError("temporal_loss: frame dimensions differ");
    const Frame warped = apply_warp(p_prev, phi);
    return mse(p_curr, warped);
}

DiscriminatorTargets DiscriminatorTargets::for_shape(Eigen::Index rows, Eigen::Index cols) {
    DiscriminatorTargets t;
    t.predicted = ImagePlane::Constant(rows, cols, -1.0f);
    t.stable = ImagePlane::Constant(rows, cols, 1.0f);
    return t;
}

double discrimination_loss(const ImagePlane& d_of_p, const ImagePlane& d_of_s) {
    if (d_of_p.rows() != d_of_s.rows() || d_of_p.cols() != d_of_s.cols())
        throw ShapeMismatchError("discrimination_loss: score map shapes differ");
    const auto t = DiscriminatorTargets::for_shape(d_of_p.rows(), d_of_p.cols());
    const double n = static_cast<double>(d_of_p.size());
    const double fake = (d_of_p - t.predicted).cast<double>().square().sum() / n;
    const double real = (d_of_s - t.stable).cast<double>().square().sum() / n;
    return fake + real;
}

double generator_loss(const LossReport& parts, const LossWeights& w) {
    if (w.alpha < 0.0 || w.beta < 0.0) throw InvalidInputError("generator_loss: negative weights");
    const double shape = parts.points + parts.relative + parts.adjacent;
    return parts.content + w.alpha * shape + w.beta * parts.temporal;
}

}  // namespace vstab::losses
