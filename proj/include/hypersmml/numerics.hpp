#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hypersmml {

/// Regularized lower incomplete gamma P(a, x), by series for x < a+1 and by
/// Lentz's continued fraction otherwise.
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;

    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series representation
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q(a, x)
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

/// CDF of the chi-squared distribution with k degrees of freedom.
inline double chi_squared_cdf(double x, int k) {
    if (k <= 0) throw std::domain_error("chi_squared_cdf: k must be positive");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * k, 0.5 * x);
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
/// Consumes the sample (sorts in place).
inline double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// Asymptotic critical value of the one-sample KS statistic at level alpha.
inline double ks_critical_value(std::size_t n, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference gradient with per-coordinate relative step.
inline Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                                   double rel_step = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

/// Central-difference Jacobian of a vector-valued map.
inline Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                                   double rel_step = 1e-5) {
    Eigen::VectorXd xp = x, xm = x;
    Eigen::MatrixXd jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
        if (jac.size() == 0) jac.resize(col.size(), x.size());
        jac.col(i) = col;
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return jac;
}

namespace detail {

inline Eigen::MatrixXd fd_hessian_step(const ScalarField& f, const Eigen::VectorXd& x,
                                       double rel_step) {
    const Eigen::Index d = x.size();
    Eigen::VectorXd h(d);
    for (Eigen::Index i = 0; i < d; ++i) h[i] = rel_step * (1.0 + std::abs(x[i]));
    const double f0 = f(x);
    Eigen::MatrixXd hess(d, d);
    Eigen::VectorXd y = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        y[i] = x[i] + h[i];
        const double fp = f(y);
        y[i] = x[i] - h[i];
        const double fm = f(y);
        y[i] = x[i];
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            y[i] = x[i] + h[i]; y[j] = x[j] + h[j];
            const double fpp = f(y);
            y[j] = x[j] - h[j];
            const double fpm = f(y);
            y[i] = x[i] - h[i]; y[j] = x[j] + h[j];
            const double fmp = f(y);
            y[j] = x[j] - h[j];
            const double fmm = f(y);
            y[i] = x[i]; y[j] = x[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return hess;
}

}  // namespace detail

/// Central-difference Hessian with one Richardson extrapolation step.
/// A single second difference at a small step loses too many digits to
/// roundoff; combining steps h and h/2 cancels the O(h^2) truncation term
/// while keeping the steps large enough for full double-precision accuracy.
inline Eigen::MatrixXd fd_hessian(const ScalarField& f, const Eigen::VectorXd& x,
                                  double rel_step = 1e-3) {
    const Eigen::MatrixXd coarse = detail::fd_hessian_step(f, x, rel_step);
    const Eigen::MatrixXd fine = detail::fd_hessian_step(f, x, 0.5 * rel_step);
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace hypersmml
