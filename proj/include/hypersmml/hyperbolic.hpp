#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include "hypersmml/params.hpp"
#include "hypersmml/types.hpp"

namespace hypersmml {

// The model with its Fisher metric is the upper half-space with metric tensor
// 2n u_{p+1}^{-2} I: hyperbolic space with every distance scaled by sqrt(2n)
// relative to the unit-curvature model, and sectional curvature -1/(2n).

/// Geodesic distance sqrt(2n) arcosh(1 + |u-w|^2 / (2 u_h w_h)).
inline double hyperbolic_distance(const UpperHalfParam& u, const UpperHalfParam& w, int n) {
    if (u.p() != w.p()) throw std::invalid_argument("hyperbolic_distance: dimension mismatch");
    const double arg = 1.0 + (u.v - w.v).squaredNorm() / (2.0 * u.height() * w.height());
    return std::sqrt(2.0 * n) * std::acosh(std::max(arg, 1.0));
}

/// Point at arclength fraction t along the geodesic from u to w. The geodesic
/// is a vertical ray or a semicircle orthogonal to the boundary; both cases
/// reduce to the 2-plane spanned by the height axis and the horizontal
/// displacement, where the angle phi along the semicircle has arclength
/// coordinate log tan(phi/2).
inline UpperHalfParam geodesic_point(const UpperHalfParam& u, const UpperHalfParam& w, double t,
                                     int /*n*/) {
    if (u.p() != w.p()) throw std::invalid_argument("geodesic_point: dimension mismatch");
    const int p = u.p();
    const VectorXd horiz = w.v.head(p) - u.v.head(p);
    const double dist_h = horiz.norm();
    const double scale = std::max(u.height(), w.height());
    if (dist_h <= 1e-15 * scale) {
        if (std::abs(w.height() - u.height()) <= 1e-15 * scale)
            throw std::invalid_argument("geodesic_point: the two endpoints coincide");
        // vertical geodesic: heights interpolate geometrically
        VectorXd out = u.v;
        out[p] = u.height() * std::pow(w.height() / u.height(), t);
        return UpperHalfParam(std::move(out));
    }
    // semicircle centered on the boundary of the 2-plane through u and w
    const double a = u.height(), b = w.height();
    const double c = (dist_h * dist_h + b * b - a * a) / (2.0 * dist_h);
    const double radius = std::sqrt(c * c + a * a);
    const double phi_u = std::atan2(a, -c);
    const double phi_w = std::atan2(b, dist_h - c);
    const double s_u = std::log(std::tan(0.5 * phi_u));
    const double s_w = std::log(std::tan(0.5 * phi_w));
    const double phi = 2.0 * std::atan(std::exp((1.0 - t) * s_u + t * s_w));
    VectorXd out(p + 1);
    out.head(p) = u.v.head(p) + ((c + radius * std::cos(phi)) / dist_h) * horiz;
    out[p] = radius * std::sin(phi);
    return UpperHalfParam(std::move(out));
}

/// Translate away from the point at infinity along the vertical geodesic,
/// shrinking the height by sqrt(2): a displacement of log sqrt(2) in the
/// unit-curvature metric, sqrt(2n) log sqrt(2) in the Fisher metric.
inline UpperHalfParam horomap_uh(const UpperHalfParam& u) {
    VectorXd out = u.v;
    out[u.p()] /= std::numbers::sqrt2;
    return UpperHalfParam(std::move(out));
}

inline UpperHalfParam horomap_uh_inverse(const UpperHalfParam& u) {
    VectorXd out = u.v;
    out[u.p()] *= std::numbers::sqrt2;
    return UpperHalfParam(std::move(out));
}

enum class HoromapDirection { Forward, Inverse };

/// The same translation in expectation coordinates. Forward shrinks the
/// residual gap by half, the inverse doubles it; both fix the first p
/// coordinates.
inline ExpectationParam horomap_xi(const ExpectationParam& xi, HoromapDirection dir) {
    const int p = xi.p();
    VectorXd out = xi.v;
    if (dir == HoromapDirection::Forward)
        out[p] = xi.v[p] - 0.5 * xi.gap();
    else
        out[p] = xi.v[p] + xi.gap();
    return ExpectationParam(std::move(out));
}

// --- hyperbolic planes -------------------------------------------------------

/// Hemisphere {|u - c| = R} centered on the boundary (c has zero height).
struct SpherePlane {
    VectorXd c;
    double radius = 0.0;
};

/// Vertical affine plane {c . u = d} with c horizontal and nonzero.
struct VerticalPlane {
    VectorXd c;
    double d = 0.0;
};

using HyperbolicPlane = std::variant<SpherePlane, VerticalPlane>;

/// Signed residual of membership: |u - c| - R for hemispheres, c.u - d for
/// vertical planes. Zero on the plane.
inline double plane_residual(const HyperbolicPlane& plane, const UpperHalfParam& u) {
    if (std::holds_alternative<SpherePlane>(plane)) {
        const auto& s = std::get<SpherePlane>(plane);
        return (u.v - s.c).norm() - s.radius;
    }
    const auto& vp = std::get<VerticalPlane>(plane);
    return vp.c.dot(u.v) - vp.d;
}

/// Affine functional a . xi + b, whose zero set is an affine plane of the
/// expectation space.
struct AffineFunctional {
    VectorXd a;
    double b = 0.0;

    AffineFunctional(VectorXd coeff, double offset) : a(std::move(coeff)), b(offset) {
        if (a.size() < 2 || a.isZero(0.0))
            throw std::invalid_argument("AffineFunctional: coefficient vector must be nonzero");
    }

    double operator()(const VectorXd& xi) const { return a.dot(xi) + b; }
};

struct EmptyPlaneError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Convert the zero set of an affine functional on the expectation space to
/// the hyperbolic plane traced out by its image under the boundary
/// translation map: a hemisphere when the last coefficient is nonzero, a
/// vertical plane otherwise. A last coefficient below 1e-12 of the largest
/// one counts as zero, so near-vertical facets do not degenerate into
/// hemispheres of enormous radius.
inline HyperbolicPlane affine_to_hyperbolic_plane(const AffineFunctional& L, int p) {
    if (L.a.size() != p + 1)
        throw std::invalid_argument("affine_to_hyperbolic_plane: dimension mismatch");
    const double a_last = L.a[p];
    if (std::abs(a_last) > 1e-12 * L.a.cwiseAbs().maxCoeff()) {
        VectorXd c = VectorXd::Zero(p + 1);
        c.head(p) = -L.a.head(p) / (2.0 * a_last);
        const double r_sq = -L.b / a_last + c.head(p).squaredNorm();
        if (!(r_sq > 0.0))
            throw EmptyPlaneError("affine_to_hyperbolic_plane: plane misses the model");
        return SpherePlane{std::move(c), std::sqrt(r_sq)};
    }
    VectorXd c = VectorXd::Zero(p + 1);
    c.head(p) = L.a.head(p);
    return VerticalPlane{std::move(c), -L.b};
}

// --- curvature ---------------------------------------------------------------

namespace detail {

/// One RK4 step of the upper half-space geodesic equation
///   x_i'' = 2 x_i' y' / y,   y'' = (y'^2 - sum x_i'^2) / y,
/// which is unchanged by constant scalings of the metric.
inline void geodesic_rk4_step(VectorXd& pos, VectorXd& vel, double h) {
    const auto accel = [](const VectorXd& q, const VectorXd& dq) {
        const Eigen::Index p = q.size() - 1;
        const double y = q[p];
        VectorXd a(q.size());
        a.head(p) = 2.0 * dq.head(p) * dq[p] / y;
        a[p] = (dq[p] * dq[p] - dq.head(p).squaredNorm()) / y;
        return a;
    };
    const VectorXd k1p = vel, k1v = accel(pos, vel);
    const VectorXd k2p = vel + 0.5 * h * k1v, k2v = accel(pos + 0.5 * h * k1p, vel + 0.5 * h * k1v);
    const VectorXd k3p = vel + 0.5 * h * k2v, k3v = accel(pos + 0.5 * h * k2p, vel + 0.5 * h * k2v);
    const VectorXd k4p = vel + h * k3v, k4v = accel(pos + h * k3p, vel + h * k3v);
    pos += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    vel += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

/// Shoot a geodesic from u with initial metric-unit direction dir (Euclidean
/// coordinates) for arclength s in the metric 2n u_h^{-2} I.
inline UpperHalfParam geodesic_shoot(const UpperHalfParam& u, const VectorXd& dir, double s,
                                     int n, int steps) {
    VectorXd pos = u.v;
    // metric-normalize: |v|_g = 1 means Euclidean norm u_h / sqrt(2n)
    VectorXd vel = dir * (u.height() / (std::sqrt(2.0 * n) * dir.norm()));
    const double h = s / steps;
    for (int i = 0; i < steps; ++i) geodesic_rk4_step(pos, vel, h);
    return UpperHalfParam(std::move(pos));
}

}  // namespace detail

/// Estimate the sectional curvature of the plane spanned by e1, e2 at u from
/// the circumference of a geodesic circle of radius r (in the Fisher metric):
/// C(r) = 2 pi r (1 - K r^2 / 6 + O(r^4)). The circle is traced by geodesic
/// shooting and measured by a chord sum over `circle_points` vertices with
/// the standard inscribed-polygon factor (pi/N)/sin(pi/N) taken out, so the
/// polygon deficit does not contaminate the curvature term.
inline double sectional_curvature_estimate(const UpperHalfParam& u, const VectorXd& e1,
                                           const VectorXd& e2, double r, int n,
                                           int circle_points = 720, int shoot_steps = 96) {
    if (e1.size() != u.v.size() || e2.size() != u.v.size())
        throw std::invalid_argument("sectional_curvature_estimate: dimension mismatch");
    if (!(r > 0.0)) throw std::domain_error("sectional_curvature_estimate: radius must be positive");
    // Gram-Schmidt in the metric at u (a scalar multiple of Euclidean)
    VectorXd b1 = e1.normalized();
    VectorXd b2 = e2 - e2.dot(b1) * b1;
    if (b2.norm() <= 1e-12 * e2.norm())
        throw std::invalid_argument("sectional_curvature_estimate: directions are collinear");
    b2.normalize();

    std::vector<UpperHalfParam> circle;
    circle.reserve(circle_points);
    for (int k = 0; k < circle_points; ++k) {
        const double alpha = 2.0 * std::numbers::pi * k / circle_points;
        const VectorXd dir = std::cos(alpha) * b1 + std::sin(alpha) * b2;
        circle.push_back(detail::geodesic_shoot(u, dir, r, n, shoot_steps));
    }
    double chord_sum = 0.0;
    for (int k = 0; k < circle_points; ++k)
        chord_sum += hyperbolic_distance(circle[k], circle[(k + 1) % circle_points], n);
    const double half_step = std::numbers::pi / circle_points;
    const double circumference = chord_sum * half_step / std::sin(half_step);

    const double k_est = 6.0 * (1.0 - circumference / (2.0 * std::numbers::pi * r)) / (r * r);
    // validity of the truncated expansion: the r^4 term K^2 r^4/120 must stay
    // well below the r^2 term |K| r^2/6
    if (std::abs(k_est) * r * r / 20.0 > 0.1)
        throw std::domain_error("sectional_curvature_estimate: radius too large for the expansion");
    return k_est;
}

/// Riemannian volume density of the expectation-space metric,
/// n^{(p+1)/2} 2^{-1/2} V(xi)^{-(p+2)/2}.
inline double hyperbolic_volume_density(const ExpectationParam& xi, int n, int p) {
    if (xi.p() != p) throw std::invalid_argument("hyperbolic_volume_density: dimension mismatch");
    return std::pow(static_cast<double>(n), 0.5 * (p + 1)) / std::numbers::sqrt2
           * std::pow(xi.gap(), -0.5 * (p + 2));
}

}  // namespace hypersmml
