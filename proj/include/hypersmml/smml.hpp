#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypersmml/hyperbolic.hpp"
#include "hypersmml/model.hpp"
#include "hypersmml/parallel.hpp"
#include "hypersmml/params.hpp"
#include "hypersmml/prior.hpp"
#include "hypersmml/rng.hpp"

namespace hypersmml {

struct EmptyCellError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A two-part code: m assertions with coding probabilities on a truncated
/// domain, and the attained expected message length I1 in nats (the detail
/// part is measured against the renormalized truncated marginal).
struct SmmlCode {
    int m = 0;
    std::vector<NaturalParam> assertions;
    std::vector<double> coding_probs;
    TruncatedDomain domain;
    double I1 = 0.0;
};

inline void validate_code(const SmmlCode& code) {
    if (code.m < 1 || static_cast<int>(code.assertions.size()) != code.m
        || static_cast<int>(code.coding_probs.size()) != code.m)
        throw std::invalid_argument("SmmlCode: inconsistent sizes");
    double sum = 0.0;
    for (double q : code.coding_probs) {
        if (!(q > 0.0)) throw std::domain_error("SmmlCode: coding probabilities must be positive");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("SmmlCode: coding probabilities must sum to 1");
}

/// lambda_i(x) = -log q_i - x . theta_i + log Z(theta_i); the code length of
/// x under assertion i, up to the carrier term shared by all assertions.
inline double lambda_score(const SuffStat& x, const NaturalParam& theta, double q, int n) {
    if (!(q > 0.0)) throw std::domain_error("lambda_score: q must be positive");
    return -std::log(q) - x.x.dot(theta.v) + log_partition(theta, n);
}

namespace detail {

/// Per-assertion constant of the affine score: lambda_i(x) = c_i - x . theta_i.
inline std::vector<double> lambda_offsets(const SmmlCode& code, int n) {
    std::vector<double> c(code.m);
    for (int i = 0; i < code.m; ++i)
        c[i] = -std::log(code.coding_probs[i]) + log_partition(code.assertions[i], n);
    return c;
}

inline int argmin_lambda(const VectorXd& x, const SmmlCode& code, const std::vector<double>& c) {
    int best = 0;
    double best_val = c[0] - x.dot(code.assertions[0].v);
    for (int i = 1; i < code.m; ++i) {
        const double v = c[i] - x.dot(code.assertions[i].v);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Smallest index attaining min_i lambda_i(x).
inline int assign_cell(const SuffStat& x, const SmmlCode& code, int n) {
    validate_code(code);
    return detail::argmin_lambda(x.x, code, detail::lambda_offsets(code, n));
}

namespace detail {

/// Shared state of one code search: the quadrature grid, normalized weights
/// and per-point carrier terms.
struct CodeGrid {
    DomainGrid grid;
    std::vector<double> norm_weight;  // weights renormalized to sum 1
    std::vector<double> log_h;        // log h_X at each grid point

    CodeGrid(const TruncatedDomain& domain, int n, int p)
        : grid(domain, n, p, domain.resolution) {
        if (!(grid.total_mass > 1e-12))
            throw std::domain_error("code grid: domain mass below 1e-12");
        const std::size_t count = grid.size();
        norm_weight.resize(count);
        log_h.resize(count);
        const double log_ch = log_carrier_constant(n, p);
        const double expo = 0.5 * (n - p - 2);
        for (std::size_t c = 0; c < count; ++c) {
            norm_weight[c] = grid.weight[c] / grid.total_mass;
            log_h[c] = log_ch + expo * std::log(residual_gap(grid.x[c]));
        }
    }

    std::size_t size() const { return grid.size(); }
};

inline std::vector<int> assign_all(const CodeGrid& cg, const SmmlCode& code, int n) {
    const std::vector<double> offsets = lambda_offsets(code, n);
    std::vector<int> cell(cg.size());
    for (std::size_t c = 0; c < cg.size(); ++c)
        cell[c] = argmin_lambda(cg.grid.x[c], code, offsets);
    return cell;
}

/// I1 = sum_c w_c (lambda_{cell(c)}(x_c) - log h_X(x_c)), the expected total
/// message length in nats under the renormalized truncated marginal.
inline double message_length(const CodeGrid& cg, const SmmlCode& code,
                             const std::vector<int>& cell, int n) {
    const std::vector<double> offsets = lambda_offsets(code, n);
    double total = 0.0;
    for (std::size_t c = 0; c < cg.size(); ++c) {
        const int i = cell[c];
        total += cg.norm_weight[c]
                 * (offsets[i] - cg.grid.x[c].dot(code.assertions[i].v) - cg.log_h[c]);
    }
    return total;
}

struct CellStats {
    std::vector<double> mass;
    std::vector<VectorXd> centroid;  // expectation-space centroids
    std::optional<int> empty_cell;
};

inline CellStats cell_stats(const CodeGrid& cg, int m, int p, const std::vector<int>& cell) {
    CellStats stats;
    stats.mass.assign(m, 0.0);
    stats.centroid.assign(m, VectorXd::Zero(p + 1));
    for (std::size_t c = 0; c < cg.size(); ++c) {
        stats.mass[cell[c]] += cg.norm_weight[c];
        stats.centroid[cell[c]] += cg.norm_weight[c] * cg.grid.x[c];
    }
    for (int i = 0; i < m; ++i) {
        if (!(stats.mass[i] > 0.0)) {
            stats.empty_cell = i;
            return stats;
        }
        stats.centroid[i] /= stats.mass[i];
    }
    return stats;
}

/// Apply the two exact block updates for a fixed partition: coding
/// probabilities become cell masses, assertions become the natural images of
/// the cell centroids. Both choices minimize I1 over their own block.
inline void update_from_stats(SmmlCode& code, const CellStats& stats, int n) {
    for (int i = 0; i < code.m; ++i) {
        code.coding_probs[i] = stats.mass[i];
        code.assertions[i] = xi_to_theta(ExpectationParam(stats.centroid[i]), n);
    }
}

}  // namespace detail

/// Expected two-part message length of a code over its own domain grid.
inline double message_length_I1(const SmmlCode& code, int n, int p) {
    validate_code(code);
    detail::CodeGrid cg(code.domain, n, p);
    return detail::message_length(cg, code, detail::assign_all(cg, code, n), n);
}

/// One exact half-step of the alternating search: with the partition induced
/// by the current code held fixed, refresh coding probabilities and
/// assertions. Throws EmptyCellError when some cell captures no grid mass.
inline SmmlCode update_weights_and_assertions(const SmmlCode& code, int n, int p) {
    validate_code(code);
    detail::CodeGrid cg(code.domain, n, p);
    const std::vector<int> cell = detail::assign_all(cg, code, n);
    const detail::CellStats stats = detail::cell_stats(cg, code.m, p, cell);
    if (stats.empty_cell)
        throw EmptyCellError("update_weights_and_assertions: cell "
                             + std::to_string(*stats.empty_cell) + " has no grid mass");
    SmmlCode out = code;
    detail::update_from_stats(out, stats, n);
    out.I1 = detail::message_length(cg, out, cell, n);
    return out;
}

/// One record per half-step of a search: the message length after the
/// partition refresh or after the weight/assertion refresh. Reseeded steps
/// restart the monotonicity baseline.
struct FitStep {
    int iteration = 0;
    bool after_update = false;  // false: after assignment, true: after update
    double I1 = 0.0;
    bool reseeded = false;
};

struct FitResult {
    SmmlCode code;
    int iterations = 0;
    int best_restart = 0;
    std::vector<FitStep> trace;  // trace of the winning restart
};

namespace detail {

struct RestartOutcome {
    bool feasible = false;
    SmmlCode code;
    int iterations = 0;
    std::vector<FitStep> trace;
};

/// Largest-lambda-margin grid point: the one the current code covers worst.
inline std::size_t worst_covered_point(const CodeGrid& cg, const SmmlCode& code, int n) {
    const std::vector<double> offsets = lambda_offsets(code, n);
    std::size_t worst = 0;
    double worst_val = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cg.size(); ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < code.m; ++i)
            best = std::min(best, offsets[i] - cg.grid.x[c].dot(code.assertions[i].v));
        if (best > worst_val) {
            worst_val = best;
            worst = c;
        }
    }
    return worst;
}

inline RestartOutcome run_restart(const CodeGrid& cg, const TruncatedDomain& domain, int m,
                                  int n, int p, int restart, std::uint64_t seed, double tol,
                                  int max_iter, const VectorXd& global_centroid) {
    RestartOutcome out;
    SmmlCode code{m, {}, std::vector<double>(m, 1.0 / m), domain, 0.0};
    code.assertions.reserve(m);
    if (restart == 0) {
        // split of the single-cell optimum: seeds fan out from the global
        // centroid along the first axis
        const double delta = 0.01 * (domain.upper[0] - domain.lower[0]);
        for (int k = 0; k < m; ++k) {
            VectorXd xi = global_centroid;
            xi[0] += (k - 0.5 * (m - 1)) * delta;
            code.assertions.push_back(xi_to_theta(ExpectationParam(std::move(xi)), n));
        }
    } else {
        Rng rng(mix_seed(seed + static_cast<std::uint64_t>(restart)));
        std::vector<std::size_t> picked;
        while (static_cast<int>(picked.size()) < m) {
            auto c = static_cast<std::size_t>(rng.uniform() * cg.size());
            c = std::min(c, cg.size() - 1);
            if (std::find(picked.begin(), picked.end(), c) == picked.end()) picked.push_back(c);
        }
        for (std::size_t c : picked)
            code.assertions.push_back(xi_to_theta(ExpectationParam(cg.grid.x[c]), n));
    }

    std::vector<int> cell, prev_cell;
    int reseed_failures = 0;
    double prev_I1 = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iter; ++iter) {
        cell = assign_all(cg, code, n);
        CellStats stats = cell_stats(cg, m, p, cell);
        bool reseeded = false;
        while (stats.empty_cell) {
            // reseed the dead assertion at the worst-covered grid point
            const int dead = *stats.empty_cell;
            const std::size_t target = worst_covered_point(cg, code, n);
            code.assertions[dead] = xi_to_theta(ExpectationParam(cg.grid.x[target]), n);
            double rest = 0.0;
            for (int i = 0; i < m; ++i)
                if (i != dead) rest += code.coding_probs[i];
            for (int i = 0; i < m; ++i)
                code.coding_probs[i] = (i == dead) ? 1.0 / m : code.coding_probs[i] * (1.0 - 1.0 / m) / rest;
            reseeded = true;
            cell = assign_all(cg, code, n);
            stats = cell_stats(cg, m, p, cell);
            if (stats.empty_cell && ++reseed_failures >= 2) return out;  // abandoned
        }
        out.trace.push_back({iter, false, message_length(cg, code, cell, n), reseeded});
        update_from_stats(code, stats, n);
        const double I1 = message_length(cg, code, cell, n);
        out.trace.push_back({iter, true, I1, false});
        out.iterations = iter;
        const bool stable = (cell == prev_cell);
        if (stable && prev_I1 - I1 < tol * (1.0 + std::abs(I1))) break;
        prev_cell = cell;
        prev_I1 = I1;
    }
    code.I1 = message_length(cg, code, assign_all(cg, code, n), n);
    out.code = std::move(code);
    out.feasible = true;
    return out;
}

}  // namespace detail

/// Alternating minimization of I1 over (partition | weights | assertions),
/// each block solved exactly on the domain grid, with deterministic restarts:
/// restart 0 splits the single-cell optimum, the rest start from random grid
/// points. The best restart by final I1 wins; ties go to the lowest index.
inline FitResult fit_smml(int m, const TruncatedDomain& domain, int n, int p, int restarts = 8,
                          std::uint64_t seed = 0, double tol = 1e-9, int max_iter = 500) {
    if (m < 1) throw std::invalid_argument("fit_smml: m must be at least 1");
    if (p >= n) throw std::domain_error("fit_smml: requires p < n");
    if (domain.dim() != p + 1) throw std::invalid_argument("fit_smml: domain dimension mismatch");
    if (restarts < 1) throw std::invalid_argument("fit_smml: restarts must be at least 1");

    const detail::CodeGrid cg(domain, n, p);
    VectorXd global_centroid = VectorXd::Zero(p + 1);
    for (std::size_t c = 0; c < cg.size(); ++c) global_centroid += cg.norm_weight[c] * cg.grid.x[c];

    FitResult result;
    if (m == 1) {
        SmmlCode code{1, {xi_to_theta(ExpectationParam(global_centroid), n)}, {1.0}, domain, 0.0};
        code.I1 = detail::message_length(cg, code, std::vector<int>(cg.size(), 0), n);
        result.code = std::move(code);
        result.trace.push_back({0, true, result.code.I1, false});
        return result;
    }

    std::vector<detail::RestartOutcome> outcomes(restarts);
    parallel_for_index(restarts, [&](int r) {
        outcomes[r] = detail::run_restart(cg, domain, m, n, p, r, seed, tol, max_iter,
                                          global_centroid);
    });

    int best = -1;
    for (int r = 0; r < restarts; ++r) {
        if (!outcomes[r].feasible) continue;
        if (best < 0 || outcomes[r].code.I1 < outcomes[best].code.I1) best = r;
    }
    if (best < 0) throw EmptyCellError("fit_smml: every restart was abandoned");
    result.code = std::move(outcomes[best].code);
    result.iterations = outcomes[best].iterations;
    result.best_restart = best;
    result.trace = std::move(outcomes[best].trace);
    return result;
}

/// Affine description of cell i: the m-1 inequalities a.x + b <= 0 with
/// a = theta_j - theta_i and b = log(q_j / q_i) + log Z(theta_i) - log Z(theta_j).
struct CellPolytope {
    int index = 0;
    std::vector<std::pair<VectorXd, double>> inequalities;
};

inline CellPolytope cell_polytope(const SmmlCode& code, int i, int n) {
    validate_code(code);
    if (i < 0 || i >= code.m) throw std::invalid_argument("cell_polytope: index out of range");
    CellPolytope poly;
    poly.index = i;
    const std::vector<double> offsets = detail::lambda_offsets(code, n);
    for (int j = 0; j < code.m; ++j) {
        if (j == i) continue;
        poly.inequalities.emplace_back(code.assertions[j].v - code.assertions[i].v,
                                       offsets[i] - offsets[j]);
    }
    return poly;
}

/// One inter-cell boundary: the affine functional separating cells i < j
/// (nonnegative on cell j's side) and, when it meets the model, its
/// hyperbolic image.
struct Facet {
    int cell_i = 0;
    int cell_j = 0;
    VectorXd a;
    double b = 0.0;
    std::optional<HyperbolicPlane> plane;  // empty if the facet misses the model
};

inline std::vector<Facet> code_facets(const SmmlCode& code, int n) {
    validate_code(code);
    const int p = code.assertions.empty() ? 0 : code.assertions[0].p();
    const std::vector<double> offsets = detail::lambda_offsets(code, n);
    std::vector<Facet> facets;
    for (int i = 0; i < code.m; ++i) {
        for (int j = i + 1; j < code.m; ++j) {
            Facet f;
            f.cell_i = i;
            f.cell_j = j;
            f.a = code.assertions[j].v - code.assertions[i].v;
            f.b = offsets[i] - offsets[j];
            if (!f.a.isZero(0.0)) {
                try {
                    f.plane = affine_to_hyperbolic_plane(AffineFunctional(f.a, f.b), p);
                } catch (const EmptyPlaneError&) {
                    // recorded as a facet without a hyperbolic image
                }
            }
            facets.push_back(std::move(f));
        }
    }
    return facets;
}

/// Hyperbolic description of every cell: each neighboring facet converted to
/// the hemisphere or vertical plane its image lies on.
struct TessellationCell {
    int index = 0;
    std::vector<int> neighbors;
    std::vector<HyperbolicPlane> planes;
    std::vector<int> dropped_neighbors;  // facets with no hyperbolic image
};

inline std::vector<TessellationCell> tessellation_hyperbolic(const SmmlCode& code, int n) {
    const std::vector<Facet> facets = code_facets(code, n);
    std::vector<TessellationCell> cells(code.m);
    for (int i = 0; i < code.m; ++i) cells[i].index = i;
    for (const Facet& f : facets) {
        for (const int side : {f.cell_i, f.cell_j}) {
            const int other = (side == f.cell_i) ? f.cell_j : f.cell_i;
            if (f.plane) {
                cells[side].neighbors.push_back(other);
                cells[side].planes.push_back(*f.plane);
            } else {
                cells[side].dropped_neighbors.push_back(other);
            }
        }
    }
    return cells;
}

}  // namespace hypersmml
