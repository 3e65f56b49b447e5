#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hypersmml/rng.hpp"
#include "hypersmml/types.hpp"

namespace hypersmml {

/// A rank-deficient design matrix (or other ill-conditioned input).
struct RankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Design matrix A together with the fixed orthonormal basis B of its column
/// space. B is pinned to A (A^T A)^{-1/2} so every run produces the same
/// sufficient statistics; any other orthonormal basis differs from it only by
/// an orthogonal change of the first p coordinates of x.
struct DesignBasis {
    MatrixXd A;
    MatrixXd B;
    int n = 0;
    int p = 0;
};

/// B = A (A^T A)^{-1/2} via symmetric eigendecomposition of A^T A.
inline MatrixXd orthonormal_basis(const MatrixXd& A) {
    const Eigen::Index n = A.rows(), p = A.cols();
    if (p < 1 || p > n) throw std::invalid_argument("orthonormal_basis: need 1 <= p <= n");
    const MatrixXd gram = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    const VectorXd& ev = eig.eigenvalues();  // ascending
    const double lo = ev[0], hi = ev[p - 1];
    if (!(lo > 1e-10 * hi)) {
        std::ostringstream msg;
        msg << "orthonormal_basis: design matrix is rank deficient "
            << "(condition number of A^T A is "
            << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) << ")";
        throw RankError(msg.str());
    }
    const VectorXd inv_sqrt = ev.array().rsqrt();
    return A * (eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose());
}

inline DesignBasis make_design_basis(MatrixXd A) {
    DesignBasis basis;
    basis.B = orthonormal_basis(A);
    basis.A = std::move(A);
    basis.n = static_cast<int>(basis.A.rows());
    basis.p = static_cast<int>(basis.A.cols());
    return basis;
}

/// Sufficient statistic T(y) = (B^T y, |y|^2). A nonnegative residual gap is
/// guaranteed mathematically; tiny negative roundoff is clamped away.
inline SuffStat suff_stat(const DesignBasis& basis, const VectorXd& y) {
    if (y.size() != basis.n) throw std::invalid_argument("suff_stat: y has wrong length");
    VectorXd x(basis.p + 1);
    x.head(basis.p) = basis.B.transpose() * y;
    x[basis.p] = y.squaredNorm();
    const double gap = residual_gap(x);
    if (gap < 0.0 && gap > -1e-9 * (1.0 + std::abs(x[basis.p])))
        x[basis.p] = x.head(basis.p).squaredNorm();
    return SuffStat(x);
}

/// Locate x relative to the solid paraboloid, with a relative tolerance
/// tau = 1e-10 (1 + |x_{p+1}|) so classification is stable across scales.
/// When p = n the data space is the paraboloid itself, so images of T are
/// never interior.
inline Region classify_data_point(const VectorXd& x, int p, int n) {
    if (x.size() != p + 1) throw std::invalid_argument("classify_data_point: size mismatch");
    const double gap = residual_gap(x);
    const double tau = 1e-10 * (1.0 + std::abs(x[p]));
    if (std::abs(gap) <= tau) return Region::Boundary;
    if (gap < 0.0) return Region::Outside;
    return (p == n) ? Region::Outside : Region::Interior;
}

/// log Z(theta) = -(n/2) log(-2 theta_{p+1}) - |theta_{1:p}|^2 / (4 theta_{p+1}).
inline double log_partition(const NaturalParam& theta, int n) {
    const int p = theta.p();
    const double last = theta.last();
    return -0.5 * n * std::log(-2.0 * last) - theta.v.head(p).squaredNorm() / (4.0 * last);
}

/// Log density of the observed data y under N_n(A beta, sigma^2 I).
inline double log_pdf_y(const DesignBasis& basis, const VectorXd& beta, double sigma,
                        const VectorXd& y) {
    if (!(sigma > 0.0)) throw std::domain_error("log_pdf_y: sigma must be positive");
    if (beta.size() != basis.p || y.size() != basis.n)
        throw std::invalid_argument("log_pdf_y: dimension mismatch");
    const double rss = (y - basis.A * beta).squaredNorm();
    return -0.5 * basis.n * std::log(2.0 * std::numbers::pi * sigma * sigma)
           - rss / (2.0 * sigma * sigma);
}

/// log of the carrier constant c_h = (2^{n/2} pi^{p/2} Gamma((n-p)/2))^{-1}.
inline double log_carrier_constant(int n, int p) {
    return -0.5 * n * std::numbers::ln2 - 0.5 * p * std::log(std::numbers::pi)
           - std::lgamma(0.5 * (n - p));
}

/// log h_X(x) = log c_h + ((n-p-2)/2) log V(x).
inline double log_carrier(const SuffStat& x, int n, int p) {
    const double gap = x.gap();
    const double expo = 0.5 * (n - p - 2);
    if (gap <= 0.0) {
        if (gap == 0.0 && n - p == 2) return log_carrier_constant(n, p);
        throw std::domain_error("log_carrier: residual gap must be positive");
    }
    return log_carrier_constant(n, p) + expo * std::log(gap);
}

/// Log density of the sufficient statistic, theta . x + log h_X(x) - log Z(theta).
/// Defined only for p < n; for p = n the distribution of X is singular.
inline double log_pdf_suffstat(const SuffStat& x, const NaturalParam& theta, int n, int p) {
    if (p >= n) throw std::domain_error("log_pdf_suffstat: requires p < n");
    if (x.p() != p || theta.p() != p)
        throw std::invalid_argument("log_pdf_suffstat: dimension mismatch");
    return theta.v.dot(x.x) + log_carrier(x, n, p) - log_partition(theta, n);
}

/// Draw sufficient statistics directly: the first p coordinates are normal
/// around B^T A beta with variance sigma^2, and the residual gap is sigma^2
/// times an independent chi-squared with n - p degrees of freedom.
inline std::vector<SuffStat> sample_suffstat(const NaturalParam& theta, int n, int p, int count,
                                             std::uint64_t seed) {
    if (p >= n) throw std::domain_error("sample_suffstat: requires p < n");
    if (theta.p() != p) throw std::invalid_argument("sample_suffstat: dimension mismatch");
    const double sigma_sq = theta.sigma_sq();
    const double sigma = std::sqrt(sigma_sq);
    const VectorXd mean = theta.v.head(p) * sigma_sq;
    Rng rng(seed);
    std::vector<SuffStat> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        VectorXd x(p + 1);
        for (int i = 0; i < p; ++i) x[i] = mean[i] + sigma * rng.normal();
        x[p] = x.head(p).squaredNorm() + sigma_sq * rng.chi_squared(n - p);
        out.emplace_back(std::move(x));
    }
    return out;
}

/// First column of the orthonormal complement of B, from a full QR
/// decomposition, with its first significant entry made positive so that the
/// choice is reproducible.
inline VectorXd orthonormal_complement_vector(const DesignBasis& basis) {
    if (basis.p >= basis.n)
        throw std::domain_error("orthonormal_complement_vector: column space is all of R^n");
    Eigen::HouseholderQR<MatrixXd> qr(basis.B);
    const MatrixXd q = qr.householderQ();
    VectorXd v = q.col(basis.p);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) v = -v;
            break;
        }
    }
    return v;
}

/// Reconstruct a data vector with the given sufficient statistic:
/// y = B x_{1:p} + sqrt(V(x)) v with v a fixed unit normal to col A.
inline VectorXd lift_to_data(const DesignBasis& basis, const SuffStat& x) {
    if (x.p() != basis.p) throw std::invalid_argument("lift_to_data: dimension mismatch");
    const double gap = x.gap();
    if (gap < -1e-10 * (1.0 + std::abs(x.x[basis.p])))
        throw std::domain_error("lift_to_data: point lies outside the data space");
    VectorXd y = basis.B * x.x.head(basis.p);
    if (basis.p == basis.n) {
        if (gap > 1e-10 * (1.0 + std::abs(x.x[basis.p])))
            throw std::domain_error("lift_to_data: no lift exists for p = n and positive gap");
        return y;
    }
    const double t = std::sqrt(std::max(gap, 0.0));
    if (t > 0.0) y += t * orthonormal_complement_vector(basis);
    return y;
}

}  // namespace hypersmml
