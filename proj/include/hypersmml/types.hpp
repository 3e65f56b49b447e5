#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

namespace hypersmml {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Residual gap V(x) = x_{p+1} - x_1^2 - ... - x_p^2.
/// Positive on the interior of the data space, zero on its parabolic boundary.
inline double residual_gap(const VectorXd& x) {
    const Eigen::Index p = x.size() - 1;
    return x[p] - x.head(p).squaredNorm();
}

/// Natural parameter of the regression family. Invariant: last entry < 0.
struct NaturalParam {
    VectorXd v;

    explicit NaturalParam(VectorXd value) : v(std::move(value)) {
        if (v.size() < 2) throw std::invalid_argument("NaturalParam: need at least 2 entries");
        if (!(v[v.size() - 1] < 0.0))
            throw std::domain_error("NaturalParam: last entry must be negative");
    }

    int p() const { return static_cast<int>(v.size()) - 1; }
    double last() const { return v[v.size() - 1]; }
    /// Noise variance sigma^2 = -1/(2 theta_{p+1}).
    double sigma_sq() const { return -1.0 / (2.0 * last()); }
};

/// Expectation parameter, identified with an interior point of the data space.
/// Invariant: residual gap strictly positive.
struct ExpectationParam {
    VectorXd v;

    explicit ExpectationParam(VectorXd value) : v(std::move(value)) {
        if (v.size() < 2) throw std::invalid_argument("ExpectationParam: need at least 2 entries");
        if (!(residual_gap(v) > 0.0))
            throw std::domain_error("ExpectationParam: residual gap must be positive");
    }

    int p() const { return static_cast<int>(v.size()) - 1; }
    double gap() const { return residual_gap(v); }
};

/// Upper half-space coordinates (B^T A beta, sigma sqrt(2n)). Invariant: height > 0.
struct UpperHalfParam {
    VectorXd v;

    explicit UpperHalfParam(VectorXd value) : v(std::move(value)) {
        if (v.size() < 2) throw std::invalid_argument("UpperHalfParam: need at least 2 entries");
        if (!(v[v.size() - 1] > 0.0))
            throw std::domain_error("UpperHalfParam: height must be positive");
    }

    int p() const { return static_cast<int>(v.size()) - 1; }
    double height() const { return v[v.size() - 1]; }
};

/// Sufficient statistic (B^T y, |y|^2). Lives in the solid paraboloid.
struct SuffStat {
    VectorXd x;

    explicit SuffStat(VectorXd value) : x(std::move(value)) {
        if (x.size() < 2) throw std::invalid_argument("SuffStat: need at least 2 entries");
    }

    int p() const { return static_cast<int>(x.size()) - 1; }
    double gap() const { return residual_gap(x); }
};

enum class Region { Interior, Boundary, Outside };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::Interior: return "interior";
        case Region::Boundary: return "boundary";
        default: return "outside";
    }
}

}  // namespace hypersmml
