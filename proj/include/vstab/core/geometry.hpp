#pragma once

#include <Eigen/Dense>

#include "vstab/core/error.hpp"

namespace vstab {

using Vec2 = Eigen::Vector2d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Six-parameter planar motion model mapping
/// (x, y) -> (a1*x + a2*y + a3, a4*x + a5*y + a6).
class AffineTransform {
public:
    /// Identity transform.
    AffineTransform() {
        m_.setZero();
        m_(0, 0) = 1.0;
        m_(1, 1) = 1.0;
    }

    explicit AffineTransform(const Mat23& m) : m_(m) {
        if (!m.allFinite()) throw InvalidInputError("AffineTransform: non-finite coefficients");
    }

    static AffineTransform identity() { return AffineTransform(); }

    static AffineTransform translation(double dx, double dy) {
        Mat23 m;
        m << 1, 0, dx, 0, 1, dy;
        return AffineTransform(m);
    }

    static AffineTransform scale(double sx, double sy) {
        Mat23 m;
        m << sx, 0, 0, 0, sy, 0;
        return AffineTransform(m);
    }

    static AffineTransform rotation(double radians) {
        const double c = std::cos(radians), s = std::sin(radians);
        Mat23 m;
        m << c, -s, 0, s, c, 0;
        return AffineTransform(m);
    }

    /// From the coefficient vector [a1, a2, a3, a4, a5, a6].
    static AffineTransform from_coefficients(const Vec6& a) {
        Mat23 m;
        m << a(0), a(1), a(2), a(3), a(4), a(5);
        return AffineTransform(m);
    }

    Vec6 coefficients() const {
        Vec6 a;
        a << m_(0, 0), m_(0, 1), m_(0, 2), m_(1, 0), m_(1, 1), m_(1, 2);
        return a;
    }

    const Mat23& matrix() const { return m_; }
    Eigen::Matrix2d linear() const { return m_.leftCols<2>(); }
    Vec2 translation_part() const { return m_.col(2); }

    Vec2 apply(const Vec2& p) const { return m_.leftCols<2>() * p + m_.col(2); }
    Vec2 apply(double x, double y) const { return apply(Vec2(x, y)); }

    double det() const { return m_(0, 0) * m_(1, 1) - m_(0, 1) * m_(1, 0); }
    bool invertible(double tol = 1e-12) const { return std::abs(det()) > tol; }

    AffineTransform inverse() const {
        if (!invertible()) throw SingularMatrixError("AffineTransform::inverse: singular linear part");
        const Eigen::Matrix2d li = linear().inverse();
        Mat23 m;
        m.leftCols<2>() = li;
        m.col(2) = -li * m_.col(2);
        return AffineTransform(m);
    }

private:
    Mat23 m_;
};

/// Applies b first, then a. Associative; identity is the neutral element.
inline AffineTransform compose(const AffineTransform& a, const AffineTransform& b) {
    Mat23 m;
    m.leftCols<2>() = a.linear() * b.linear();
    m.col(2) = a.linear() * b.translation_part() + a.translation_part();
    return AffineTransform(m);
}

/// 3x3 projective planar transform, stored normalized so the bottom-right
/// entry is 1 whenever it is nonzero.
class Homography {
public:
    Homography() : m_(Eigen::Matrix3d::Identity()) {}

    explicit Homography(const Eigen::Matrix3d& m) : m_(m) {
        if (!m.allFinite()) throw InvalidInputError("Homography: non-finite entries");
        if (std::abs(m_.determinant()) <= 1e-12)
            throw SingularMatrixError("Homography: determinant below 1e-12");
        if (m_(2, 2) != 0.0) m_ /= m_(2, 2);
    }

    const Eigen::Matrix3d& matrix() const { return m_; }
    Eigen::Matrix2d linear() const { return m_.topLeftCorner<2, 2>(); }

    Homography inverse() const { return Homography(m_.inverse().eval()); }

    Vec2 apply(const Vec2& p) const {
        const Eigen::Vector3d q = m_ * Eigen::Vector3d(p.x(), p.y(), 1.0);
        if (std::abs(q.z()) < 1e-300) throw SingularMatrixError("Homography::apply: point at infinity");
        return Vec2(q.x() / q.z(), q.y() / q.z());
    }

private:
    Eigen::Matrix3d m_;
};

/// Exact 3x3 embedding of an affine transform (last row 0, 0, 1).
inline Homography to_homography(const AffineTransform& a) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m.topRows<2>() = a.matrix();
    return Homography(m);
}

/// Affine part of a homography: the projective row replaced by (0, 0, 1).
/// The non-affine remainder is recovered as T = A^-1 * H.
inline AffineTransform affine_part(const Homography& h) {
    Mat23 m = h.matrix().topRows<2>();
    return AffineTransform(m);
}

}  // namespace vstab
