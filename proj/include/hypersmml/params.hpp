#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <variant>

#include "hypersmml/model.hpp"
#include "hypersmml/types.hpp"

namespace hypersmml {

enum class Coord { Natural, Expectation, UpperHalf };

inline const char* to_string(Coord c) {
    switch (c) {
        case Coord::Natural: return "natural";
        case Coord::Expectation: return "expectation";
        default: return "upper-half";
    }
}

// --- closed-form reparameterisation maps -----------------------------------
//
// All six maps below are mutually consistent diffeomorphisms between
//   natural      theta, last entry negative,
//   expectation  xi = E[X | theta], interior of the solid paraboloid,
//   upper half   u = (B^T A beta, sigma sqrt(2n)), positive height.

inline ExpectationParam theta_to_xi(const NaturalParam& theta, int n) {
    const int p = theta.p();
    const double s = -2.0 * theta.last();  // 1 / sigma^2
    VectorXd xi(p + 1);
    xi.head(p) = theta.v.head(p) / s;
    xi[p] = (n + theta.v.head(p).squaredNorm() / s) / s;
    return ExpectationParam(std::move(xi));
}

inline NaturalParam xi_to_theta(const ExpectationParam& xi, int n) {
    const int p = xi.p();
    const double scale = n / xi.gap();
    VectorXd theta(p + 1);
    theta.head(p) = scale * xi.v.head(p);
    theta[p] = -0.5 * scale;
    return NaturalParam(std::move(theta));
}

inline ExpectationParam u_to_xi(const UpperHalfParam& u, int /*n*/) {
    const int p = u.p();
    VectorXd xi(p + 1);
    xi.head(p) = u.v.head(p);
    xi[p] = u.v.head(p).squaredNorm() + 0.5 * u.height() * u.height();
    return ExpectationParam(std::move(xi));
}

inline UpperHalfParam xi_to_u(const ExpectationParam& xi, int /*n*/) {
    const int p = xi.p();
    VectorXd u(p + 1);
    u.head(p) = xi.v.head(p);
    u[p] = std::sqrt(2.0 * xi.gap());
    return UpperHalfParam(std::move(u));
}

inline UpperHalfParam theta_to_u(const NaturalParam& theta, int n) {
    const int p = theta.p();
    const double s = -2.0 * theta.last();
    VectorXd u(p + 1);
    u.head(p) = theta.v.head(p) / s;
    u[p] = std::sqrt(-4.0 * n * theta.last()) / s;
    return UpperHalfParam(std::move(u));
}

inline NaturalParam u_to_theta(const UpperHalfParam& u, int n) {
    const int p = u.p();
    const double scale = 2.0 * n / (u.height() * u.height());  // 1 / sigma^2
    VectorXd theta(p + 1);
    theta.head(p) = scale * u.v.head(p);
    theta[p] = -0.5 * scale;
    return NaturalParam(std::move(theta));
}

/// A model point tagged with its coordinate system. The three systems all
/// live in R^{p+1}, so carrying the tag in the type is what prevents silently
/// feeding a point of one system into a formula for another.
using ModelPoint = std::variant<NaturalParam, ExpectationParam, UpperHalfParam>;

inline Coord coord_of(const ModelPoint& point) {
    if (std::holds_alternative<NaturalParam>(point)) return Coord::Natural;
    if (std::holds_alternative<ExpectationParam>(point)) return Coord::Expectation;
    return Coord::UpperHalf;
}

inline const VectorXd& coords_of(const ModelPoint& point) {
    return std::visit([](const auto& q) -> const VectorXd& { return q.v; }, point);
}

inline ModelPoint reparameterize(const ModelPoint& point, Coord to, int n) {
    switch (coord_of(point)) {
        case Coord::Natural: {
            const auto& theta = std::get<NaturalParam>(point);
            if (to == Coord::Natural) return theta;
            if (to == Coord::Expectation) return theta_to_xi(theta, n);
            return theta_to_u(theta, n);
        }
        case Coord::Expectation: {
            const auto& xi = std::get<ExpectationParam>(point);
            if (to == Coord::Natural) return xi_to_theta(xi, n);
            if (to == Coord::Expectation) return xi;
            return xi_to_u(xi, n);
        }
        default: {
            const auto& u = std::get<UpperHalfParam>(point);
            if (to == Coord::Natural) return u_to_theta(u, n);
            if (to == Coord::Expectation) return u_to_xi(u, n);
            return u;
        }
    }
}

/// u = (B^T A beta, sigma sqrt(2n)).
inline UpperHalfParam from_beta_sigma(const DesignBasis& basis, const VectorXd& beta,
                                      double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("from_beta_sigma: sigma must be positive");
    if (beta.size() != basis.p) throw std::invalid_argument("from_beta_sigma: beta size mismatch");
    VectorXd u(basis.p + 1);
    u.head(basis.p) = basis.B.transpose() * (basis.A * beta);
    u[basis.p] = sigma * std::sqrt(2.0 * basis.n);
    return UpperHalfParam(std::move(u));
}

/// Matched natural parameter theta = (B^T A beta, -1/2) / sigma^2.
inline NaturalParam natural_from_beta_sigma(const DesignBasis& basis, const VectorXd& beta,
                                            double sigma) {
    return u_to_theta(from_beta_sigma(basis, beta, sigma), basis.n);
}

// --- Fisher information -----------------------------------------------------

struct FisherMatrix {
    MatrixXd g;
    Coord system;
};

/// Upper half-space metric: 2n u_{p+1}^{-2} I, a scaled hyperbolic metric.
inline FisherMatrix fisher_upper_half(const UpperHalfParam& u, int n) {
    const int d = u.p() + 1;
    const double scale = 2.0 * n / (u.height() * u.height());
    return {scale * MatrixXd::Identity(d, d), Coord::UpperHalf};
}

/// Natural-coordinate metric = Hessian of the log-partition function.
inline FisherMatrix fisher_natural(const NaturalParam& theta, int n) {
    const int p = theta.p();
    const double last = theta.last();
    MatrixXd g(p + 1, p + 1);
    g.topLeftCorner(p, p) = MatrixXd::Identity(p, p);
    const VectorXd cross = -theta.v.head(p) / last;
    g.block(0, p, p, 1) = cross;
    g.block(p, 0, 1, p) = cross.transpose();
    g(p, p) = -n / last + theta.v.head(p).squaredNorm() / (last * last);
    g *= 1.0 / (-2.0 * last);
    return {std::move(g), Coord::Natural};
}

/// Expectation-coordinate metric, the matrix inverse of the natural one at
/// the matched point.
inline FisherMatrix fisher_expectation(const ExpectationParam& xi, int n) {
    const FisherMatrix gt = fisher_natural(xi_to_theta(xi, n), n);
    return {gt.g.inverse(), Coord::Expectation};
}

/// Pull a metric back through a map with Jacobian J: returns J^T g J,
/// symmetrized against roundoff.
inline MatrixXd pullback_metric(const MatrixXd& jacobian, const MatrixXd& g) {
    if (g.rows() != g.cols() || jacobian.rows() != g.rows())
        throw std::invalid_argument("pullback_metric: dimension mismatch");
    MatrixXd out = jacobian.transpose() * g * jacobian;
    out = 0.5 * (out + out.transpose()).eval();
    return out;
}

inline MatrixXd pullback_metric(const MatrixXd& jacobian, const FisherMatrix& g) {
    return pullback_metric(jacobian, g.g);
}

}  // namespace hypersmml
