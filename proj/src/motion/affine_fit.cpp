#include "vstab/motion/affine_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "vstab/core/rng.hpp"

namespace vstab::motion {

AffineFitSystem build_affine_system(const CorrespondenceSet& set) {
    const auto n = static_cast<Eigen::Index>(set.size());
    if (n < 3) throw InsufficientPointsError("build_affine_system: need at least 3 correspondences");

    AffineFitSystem sys;
    sys.design = Eigen::MatrixXd::Zero(2 * n, 6);
    sys.rhs.resize(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = set[static_cast<std::size_t>(i)];
        sys.design(i, 0) = c.source.x();
        sys.design(i, 1) = c.source.y();
        sys.design(i, 2) = 1.0;
        sys.design(n + i, 3) = c.source.x();
        sys.design(n + i, 4) = c.source.y();
        sys.design(n + i, 5) = 1.0;
        sys.rhs(i) = c.target.x();
        sys.rhs(n + i) = c.target.y();
    }
    return sys;
}

AffineTransform solve_affine_lsq(const AffineFitSystem& system) {
    if (system.design.rows() != system.rhs.size() || system.design.cols() != 6)
        throw ShapeMismatchError("solve_affine_lsq: malformed system");

    const Eigen::MatrixXd& a = system.design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 6)
        throw DegenerateGeometryError("solve_affine_lsq: rank-deficient system (collinear points)");

    // Normal equations are accurate for these tiny, well-scaled systems;
    // fall back to QR when the Cholesky factorization degrades.
    const Eigen::Matrix<double, 6, 6> ata = a.transpose() * a;
    const Vec6 atb = a.transpose() * system.rhs;
    Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(ata);
    Vec6 x;
    if (llt.info() == Eigen::Success) {
        x = llt.solve(atb);
        const double residual = (ata * x - atb).norm();
        if (!x.allFinite() || residual > 1e-6 * (1.0 + atb.norm())) x = qr.solve(system.rhs);
    } else {
        x = qr.solve(system.rhs);
    }
    if (!x.allFinite()) throw DegenerateGeometryError("solve_affine_lsq: solve produced non-finite result");
    return AffineTransform::from_coefficients(x);
}

namespace {

double residual_px(const AffineTransform& t, const Correspondence& c) {
    return (t.apply(c.source) - c.target).norm();
}

bool collinear(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Vec2 u = b - a, v = c - a;
    return std::abs(u.x() * v.y() - u.y() * v.x()) < 1e-9;
}

// Exact affine through 3 non-collinear point pairs.
AffineTransform fit_minimal(const Correspondence& c0, const Correspondence& c1,
                            const Correspondence& c2) {
    Eigen::Matrix3d s;
    s << c0.source.x(), c0.source.y(), 1.0,
         c1.source.x(), c1.source.y(), 1.0,
         c2.source.x(), c2.source.y(), 1.0;
    Eigen::Vector3d tx(c0.target.x(), c1.target.x(), c2.target.x());
    Eigen::Vector3d ty(c0.target.y(), c1.target.y(), c2.target.y());
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(s);
    const Eigen::Vector3d rx = lu.solve(tx);
    const Eigen::Vector3d ry = lu.solve(ty);
    Vec6 coeff;
    coeff << rx(0), rx(1), rx(2), ry(0), ry(1), ry(2);
    return AffineTransform::from_coefficients(coeff);
}

}  // namespace

RansacResult ransac_affine(const CorrespondenceSet& set, const RansacConfig& cfg) {
    const std::size_t n = set.size();
    if (n < 3) throw InsufficientPointsError("ransac_affine: need at least 3 correspondences");
    if (cfg.iterations < 1 || cfg.inlier_threshold <= 0.0)
        throw InvalidInputError("ransac_affine: bad config");

    Rng rng(cfg.seed);
    int best_count = -1;
    std::vector<std::size_t> best_inlier_indices;

    for (int it = 0; it < cfg.iterations; ++it) {
        std::size_t i0 = rng.index(n), i1 = rng.index(n), i2 = rng.index(n);
        if (i0 == i1 || i0 == i2 || i1 == i2) continue;
        if (collinear(set[i0].source, set[i1].source, set[i2].source)) continue;

        AffineTransform hypothesis;
        try {
            hypothesis = fit_minimal(set[i0], set[i1], set[i2]);
        } catch (const Error&) {
            continue;
        }

        std::vector<std::size_t> inlier_indices;
        for (std::size_t i = 0; i < n; ++i)
            if (residual_px(hypothesis, set[i]) <= cfg.inlier_threshold) inlier_indices.push_back(i);
        if (static_cast<int>(inlier_indices.size()) > best_count) {
            best_count = static_cast<int>(inlier_indices.size());
            best_inlier_indices = std::move(inlier_indices);
        }
    }

    if (best_count < std::max(cfg.min_inliers, 3))
        throw NoModelError("ransac_affine: consensus below minimum inlier count");

    // Refit on the consensus set, then rebuild the mask against the refit
    // model so every reported inlier respects the threshold.
    std::vector<Correspondence> consensus;
    consensus.reserve(best_inlier_indices.size());
    for (auto i : best_inlier_indices) consensus.push_back(set[i]);
    AffineTransform model = solve_affine_lsq(build_affine_system(CorrespondenceSet(std::move(consensus))));

    RansacResult result;
    result.transform = model;
    result.inliers.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (residual_px(model, set[i]) <= cfg.inlier_threshold) {
            result.inliers[i] = true;
            ++result.inlier_count;
        }
    }
    if (result.inlier_count < std::max(cfg.min_inliers, 3))
        throw NoModelError("ransac_affine: refit lost consensus");
    return result;
}

std::vector<AffineTransform> chain_transforms(const std::vector<AffineTransform>& per_pair) {
    if (per_pair.empty()) throw InvalidInputError("chain_transforms: empty input");
    std::vector<AffineTransform> out;
    out.reserve(per_pair.size());
    AffineTransform acc = per_pair.front();
    out.push_back(acc);
    for (std::size_t k = 1; k < per_pair.size(); ++k) {
        acc = compose(per_pair[k], acc);
        out.push_back(acc);
    }
    return out;
}

}  // namespace vstab::motion
