#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hypersmml/params.hpp"
#include "hypersmml/types.hpp"

namespace hypersmml {

/// Jeffreys prior on the natural parameter space,
/// sqrt(det g) = sqrt(n) 2^{-(p+1)/2} (-theta_{p+1})^{-(p+2)/2}.
inline double jeffreys_prior_natural(const NaturalParam& theta, int n, int p) {
    if (theta.p() != p) throw std::invalid_argument("jeffreys_prior_natural: dimension mismatch");
    return std::sqrt(static_cast<double>(n)) * std::pow(2.0, -0.5 * (p + 1))
           * std::pow(-theta.last(), -0.5 * (p + 2));
}

/// log of the marginal constant c_r = sqrt(n) 2^{(p-1)/2} Gamma(n/2) / Gamma((n-p)/2),
/// evaluated through log-gamma so large n cannot overflow.
inline double log_marginal_constant(int n, int p) {
    if (p >= n) throw std::domain_error("log_marginal_constant: requires p < n");
    return 0.5 * std::log(static_cast<double>(n)) + 0.5 * (p - 1) * std::numbers::ln2
           + std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - p));
}

/// Marginal density of the sufficient statistic under the Jeffreys prior,
/// c_r V(x)^{-(p+2)/2}. Improper: integrable on compact subsets of the
/// interior only.
inline double marginal_density(const SuffStat& x, int n, int p) {
    if (x.p() != p) throw std::invalid_argument("marginal_density: dimension mismatch");
    const double gap = x.gap();
    if (!(gap > 0.0)) throw std::domain_error("marginal_density: residual gap must be positive");
    return std::exp(log_marginal_constant(n, p) - 0.5 * (p + 2) * std::log(gap));
}

/// The constant ratio hyperbolic_volume_density / marginal_density =
/// Gamma((n-p)/2) / Gamma(n/2) * (n/2)^{p/2}. Approaches 1 when p << n.
inline double density_ratio_constant(int n, int p) {
    if (p >= n) throw std::domain_error("density_ratio_constant: requires p < n");
    return std::exp(std::lgamma(0.5 * (n - p)) - std::lgamma(0.5 * n)
                    + 0.5 * p * std::log(0.5 * n));
}

/// Axis-aligned box in upper half-space coordinates, with a midpoint grid of
/// `resolution` cells per axis. The truncated marginal used by the code
/// search is the marginal renormalized over this box.
struct TruncatedDomain {
    VectorXd lower;
    VectorXd upper;
    int resolution = 64;

    /// Default: the p = 1 search box, first axis [-2, 2], height [0.5, 4].
    TruncatedDomain() : lower(2), upper(2) {
        lower << -2.0, 0.5;
        upper << 2.0, 4.0;
    }

    TruncatedDomain(VectorXd lo, VectorXd hi, int res)
        : lower(std::move(lo)), upper(std::move(hi)), resolution(res) {
        if (lower.size() != upper.size() || lower.size() < 2)
            throw std::invalid_argument("TruncatedDomain: bound size mismatch");
        if (!(lower[lower.size() - 1] > 0.0))
            throw std::domain_error("TruncatedDomain: lower height must be positive");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("TruncatedDomain: lower must be below upper");
        if (resolution < 2) throw std::invalid_argument("TruncatedDomain: resolution < 2");
    }

    int dim() const { return static_cast<int>(lower.size()); }
};

/// Default search box: last axis (height) in [0.5, 4], the rest in [-2, 2].
inline TruncatedDomain default_domain(int p, int resolution = 64) {
    VectorXd lo(p + 1), hi(p + 1);
    lo.setConstant(-2.0);
    hi.setConstant(2.0);
    lo[p] = 0.5;
    hi[p] = 4.0;
    return TruncatedDomain(std::move(lo), std::move(hi), resolution);
}

/// Midpoint-rule grid over a truncated domain: cell centers in u-coordinates,
/// their images x = xi(u) in the data space, and unnormalized marginal
/// weights r(x) |det Dxi/Du| vol(cell), where the Jacobian factor is the cell
/// height u_{p+1}.
struct DomainGrid {
    std::vector<VectorXd> x;       // data-space cell centers
    std::vector<double> weight;    // unnormalized quadrature weights
    double total_mass = 0.0;       // sum of weights = truncated marginal mass

    DomainGrid(const TruncatedDomain& domain, int n, int p, int resolution) {
        if (domain.dim() != p + 1) throw std::invalid_argument("DomainGrid: dimension mismatch");
        if (resolution < 2) throw std::invalid_argument("DomainGrid: resolution < 2");
        const int dim = p + 1;
        VectorXd h = (domain.upper - domain.lower) / resolution;
        double cell_vol = 1.0;
        for (int i = 0; i < dim; ++i) cell_vol *= h[i];
        const std::int64_t count = [&] {
            std::int64_t c = 1;
            for (int i = 0; i < dim; ++i) c *= resolution;
            return c;
        }();
        x.reserve(count);
        weight.reserve(count);
        std::vector<int> idx(dim, 0);
        VectorXd u(dim);
        for (std::int64_t cell = 0; cell < count; ++cell) {
            for (int i = 0; i < dim; ++i) u[i] = domain.lower[i] + (idx[i] + 0.5) * h[i];
            VectorXd xi(dim);
            xi.head(p) = u.head(p);
            xi[p] = u.head(p).squaredNorm() + 0.5 * u[p] * u[p];
            const double density = std::exp(log_marginal_constant(n, p)
                                            - 0.5 * (p + 2) * std::log(0.5 * u[p] * u[p]));
            const double w = density * u[p] * cell_vol;
            x.push_back(std::move(xi));
            weight.push_back(w);
            total_mass += w;
            // odometer increment, last axis fastest
            for (int i = dim - 1; i >= 0; --i) {
                if (++idx[i] < resolution) break;
                idx[i] = 0;
            }
        }
    }

    std::size_t size() const { return x.size(); }
};

/// Mass of the improper marginal over the image of a u-coordinate box,
/// by the midpoint rule with `resolution` cells per axis.
inline double truncated_mass(const TruncatedDomain& domain, int n, int p, int resolution) {
    return DomainGrid(domain, n, p, resolution).total_mass;
}

}  // namespace hypersmml
