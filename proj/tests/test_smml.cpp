#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <vector>

#include "hypersmml/rng.hpp"
#include "hypersmml/smml.hpp"

using namespace hypersmml;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
    VectorXd v(2);
    v << a, b;
    return v;
}

SmmlCode mirror_pair_code(double offset, double q0, const TruncatedDomain& domain) {
    SmmlCode code{2,
                  {NaturalParam(vec2(offset, -0.8)), NaturalParam(vec2(-offset, -0.8))},
                  {q0, 1.0 - q0},
                  domain,
                  0.0};
    return code;
}

std::vector<SuffStat> grid_points(const TruncatedDomain& domain, int n, int p) {
    DomainGrid grid(domain, n, p, domain.resolution);
    std::vector<SuffStat> pts;
    pts.reserve(grid.size());
    for (const auto& x : grid.x) pts.emplace_back(x);
    return pts;
}

}  // namespace

TEST_CASE("lambda_score") {
    SECTION("hand value") {
        const double v = lambda_score(SuffStat(vec2(0.0, 1.0)), NaturalParam(vec2(0.0, -0.5)),
                                      1.0, 3);
        REQUIRE(v == Catch::Approx(0.5).epsilon(1e-14));
    }
    SECTION("halving q adds exactly log 2") {
        const SuffStat x(vec2(0.4, 1.2));
        const NaturalParam theta(vec2(1.0, -0.7));
        const double full = lambda_score(x, theta, 0.5, 4);
        const double half = lambda_score(x, theta, 0.25, 4);
        REQUIRE(half - full == Catch::Approx(std::numbers::ln2).epsilon(1e-13));
    }
    SECTION("argmin of lambda is argmax of q times the density") {
        Rng rng(17);
        const int n = 5, p = 1;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<NaturalParam> thetas;
            std::vector<double> qs;
            double qsum = 0.0;
            for (int i = 0; i < 3; ++i) {
                thetas.push_back(NaturalParam(vec2(2.0 * rng.normal(),
                                                   -(0.2 + 2.0 * rng.uniform()))));
                qs.push_back(0.1 + rng.uniform());
                qsum += qs.back();
            }
            for (double& q : qs) q /= qsum;
            VectorXd xv(2);
            xv[0] = 2.0 * rng.normal();
            xv[1] = xv[0] * xv[0] + 0.1 + 3.0 * rng.uniform();
            const SuffStat x(xv);
            int best_lambda = 0, best_post = 0;
            double lam_min = 1e300, post_max = -1e300;
            for (int i = 0; i < 3; ++i) {
                const double lam = lambda_score(x, thetas[i], qs[i], n);
                const double post = std::log(qs[i]) + log_pdf_suffstat(x, thetas[i], n, p);
                if (lam < lam_min) { lam_min = lam; best_lambda = i; }
                if (post > post_max) { post_max = post; best_post = i; }
            }
            REQUIRE(best_lambda == best_post);
        }
    }
    SECTION("q must be positive") {
        REQUIRE_THROWS_AS(lambda_score(SuffStat(vec2(0.0, 1.0)), NaturalParam(vec2(0.0, -0.5)),
                                       0.0, 3),
                          std::domain_error);
    }
}

TEST_CASE("assign_cell") {
    const TruncatedDomain domain = default_domain(1, 16);

    SECTION("single-cell codes assign everything to cell zero") {
        SmmlCode code{1, {NaturalParam(vec2(0.0, -1.0))}, {1.0}, domain, 0.0};
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            VectorXd xv(2);
            xv[0] = 2.0 * rng.normal();
            xv[1] = xv[0] * xv[0] + 0.1 + rng.uniform();
            REQUIRE(assign_cell(SuffStat(xv), code, 4) == 0);
        }
    }
    SECTION("mirror-symmetric pair splits on the sign of x1, ties to the lower index") {
        const SmmlCode code = mirror_pair_code(1.2, 0.5, domain);
        REQUIRE(assign_cell(SuffStat(vec2(0.7, 1.5)), code, 4) == 0);
        REQUIRE(assign_cell(SuffStat(vec2(-0.7, 1.5)), code, 4) == 1);
        REQUIRE(assign_cell(SuffStat(vec2(0.0, 1.5)), code, 4) == 0);
        // brute-force comparison against lambda_score
        Rng rng(14);
        for (int trial = 0; trial < 100; ++trial) {
            VectorXd xv(2);
            xv[0] = 2.0 * rng.normal();
            xv[1] = xv[0] * xv[0] + 0.05 + 2.0 * rng.uniform();
            const SuffStat x(xv);
            const double l0 = lambda_score(x, code.assertions[0], 0.5, 4);
            const double l1 = lambda_score(x, code.assertions[1], 0.5, 4);
            REQUIRE(assign_cell(x, code, 4) == ((l1 < l0) ? 1 : 0));
        }
    }
    SECTION("raising a coding probability only grows its cell") {
        const SmmlCode before = mirror_pair_code(0.9, 0.5, domain);
        const SmmlCode after = mirror_pair_code(0.9, 0.65, domain);
        for (const auto& x : grid_points(domain, 4, 1)) {
            if (assign_cell(x, before, 4) == 0) REQUIRE(assign_cell(x, after, 4) == 0);
        }
    }
}

TEST_CASE("message_length_I1") {
    const int n = 4, p = 1;

    SECTION("single cell: the coding term vanishes") {
        const TruncatedDomain domain = default_domain(p, 64);
        SmmlCode code{1, {NaturalParam(vec2(0.3, -1.1))}, {1.0}, domain, 0.0};
        const double i1 = message_length_I1(code, n, p);
        // independent accumulation straight from the definition
        DomainGrid grid(domain, n, p, domain.resolution);
        double expect = 0.0;
        for (std::size_t c = 0; c < grid.size(); ++c)
            expect -= grid.weight[c] / grid.total_mass
                      * log_pdf_suffstat(SuffStat(grid.x[c]), code.assertions[0], n, p);
        REQUIRE(i1 == Catch::Approx(expect).epsilon(1e-12));
    }

    SECTION("self-convergence under grid refinement") {
        const TruncatedDomain coarse = default_domain(p, 64);
        const SmmlCode code = fit_smml(2, coarse, n, p, 4, 11).code;
        const double i64 = message_length_I1(code, n, p);
        SmmlCode refined = code;
        refined.domain = default_domain(p, 128);
        const double i128 = message_length_I1(refined, n, p);
        REQUIRE(std::abs(i128 - i64) < 0.005 * std::abs(i64));
    }

    SECTION("moving the single assertion to the centroid never increases I1") {
        const TruncatedDomain domain = default_domain(p, 32);
        Rng rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            SmmlCode code{1,
                          {NaturalParam(vec2(2.0 * rng.normal(), -(0.2 + 2.0 * rng.uniform())))},
                          {1.0},
                          domain,
                          0.0};
            const double before = message_length_I1(code, n, p);
            const SmmlCode updated = update_weights_and_assertions(code, n, p);
            REQUIRE(updated.I1 <= before + 1e-12 * (1.0 + std::abs(before)));
        }
    }

    SECTION("degenerate domain mass is rejected") {
        VectorXd lo = vec2(50.0, 1e6);
        VectorXd hi = vec2(50.001, 1e6 + 0.001);
        SmmlCode code{1, {NaturalParam(vec2(0.0, -1.0))}, {1.0}, TruncatedDomain(lo, hi, 4), 0.0};
        REQUIRE_THROWS_AS(message_length_I1(code, n, p), std::domain_error);
    }
}

TEST_CASE("update_weights_and_assertions") {
    const int n = 4, p = 1;
    const TruncatedDomain domain = default_domain(p, 32);

    SECTION("single cell: assertion moves to the domain centroid") {
        SmmlCode code{1, {NaturalParam(vec2(1.0, -0.4))}, {1.0}, domain, 0.0};
        const SmmlCode updated = update_weights_and_assertions(code, n, p);
        REQUIRE(updated.coding_probs[0] == Catch::Approx(1.0).epsilon(1e-12));
        DomainGrid grid(domain, n, p, domain.resolution);
        VectorXd centroid = VectorXd::Zero(2);
        for (std::size_t c = 0; c < grid.size(); ++c)
            centroid += grid.weight[c] / grid.total_mass * grid.x[c];
        const NaturalParam expect = xi_to_theta(ExpectationParam(centroid), n);
        REQUIRE((updated.assertions[0].v - expect.v).cwiseAbs().maxCoeff() < 1e-12);
    }

    SECTION("cell centroids are interior points") {
        Rng rng(41);
        for (int trial = 0; trial < 10; ++trial) {
            SmmlCode code = mirror_pair_code(0.3 + rng.uniform(), 0.3 + 0.4 * rng.uniform(),
                                             domain);
            const SmmlCode updated = update_weights_and_assertions(code, n, p);
            for (const auto& theta : updated.assertions) {
                const ExpectationParam xi = theta_to_xi(theta, n);
                REQUIRE(xi.gap() > 0.0);
            }
        }
    }

    SECTION("mirror symmetry of the domain and seeds is preserved") {
        SmmlCode code = mirror_pair_code(0.6, 0.5, domain);
        for (int step = 0; step < 3; ++step) {
            code = update_weights_and_assertions(code, n, p);
            REQUIRE(code.coding_probs[0] == Catch::Approx(code.coding_probs[1]).epsilon(1e-12));
            REQUIRE(code.assertions[0].v[0]
                    == Catch::Approx(-code.assertions[1].v[0]).epsilon(1e-12));
            REQUIRE(code.assertions[0].v[1]
                    == Catch::Approx(code.assertions[1].v[1]).epsilon(1e-12));
        }
    }

    SECTION("an assertion so remote that its cell is empty raises the dedicated error") {
        SmmlCode code{2,
                      {NaturalParam(vec2(0.0, -1.0)), NaturalParam(vec2(200.0, -0.01))},
                      {1.0 - 1e-12, 1e-12},
                      domain,
                      0.0};
        REQUIRE_THROWS_AS(update_weights_and_assertions(code, n, p), EmptyCellError);
    }
}

TEST_CASE("fit_smml") {
    const int n = 4, p = 1;

    SECTION("m = 1 is the closed-form centroid code") {
        const TruncatedDomain domain = default_domain(p, 64);
        const FitResult fit = fit_smml(1, domain, n, p, 8, 5);
        REQUIRE(fit.iterations == 0);
        REQUIRE(fit.code.coding_probs.size() == 1);
        REQUIRE(fit.code.coding_probs[0] == 1.0);
        DomainGrid grid(domain, n, p, domain.resolution);
        VectorXd centroid = VectorXd::Zero(2);
        for (std::size_t c = 0; c < grid.size(); ++c)
            centroid += grid.weight[c] / grid.total_mass * grid.x[c];
        const NaturalParam expect = xi_to_theta(ExpectationParam(centroid), n);
        REQUIRE((fit.code.assertions[0].v - expect.v).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(fit.code.I1 == Catch::Approx(message_length_I1(fit.code, n, p)).epsilon(1e-14));
    }

    SECTION("message length is non-increasing across half-steps") {
        const FitResult fit = fit_smml(3, default_domain(p, 64), n, p, 6, 99);
        double previous = std::numeric_limits<double>::infinity();
        for (const FitStep& step : fit.trace) {
            if (!step.reseeded)
                REQUIRE(step.I1 <= previous + 1e-12 * (1.0 + std::abs(previous)));
            previous = step.I1;
        }
    }

    SECTION("more cells never hurt") {
        const TruncatedDomain domain = default_domain(p, 64);
        const double i1 = fit_smml(1, domain, n, p, 8, 7).code.I1;
        const double i2 = fit_smml(2, domain, n, p, 8, 7).code.I1;
        const double i3 = fit_smml(3, domain, n, p, 8, 7).code.I1;
        REQUIRE(i2 <= i1 + 1e-9);
        REQUIRE(i3 <= i2 + 1e-9);
    }

    SECTION("the fitted code is a fixed point of the update") {
        const FitResult fit = fit_smml(2, default_domain(p, 64), n, p, 8, 3);
        const SmmlCode& code = fit.code;
        double qsum = 0.0;
        for (double q : code.coding_probs) qsum += q;
        REQUIRE(std::abs(qsum - 1.0) < 1e-9);

        const SmmlCode next = update_weights_and_assertions(code, n, p);
        REQUIRE(std::abs(next.I1 - code.I1) < 1e-9 * (1.0 + std::abs(code.I1)));
        for (int i = 0; i < code.m; ++i) {
            REQUIRE((next.assertions[i].v - code.assertions[i].v).cwiseAbs().maxCoeff() < 1e-9);
            REQUIRE(next.coding_probs[i] == Catch::Approx(code.coding_probs[i]).margin(1e-9));
        }
        // no grid point moves between cells
        DomainGrid grid(code.domain, n, p, code.domain.resolution);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const SuffStat x(grid.x[c]);
            REQUIRE(assign_cell(x, code, n) == assign_cell(x, next, n));
        }
    }

    SECTION("deterministic in the seed") {
        const TruncatedDomain domain = default_domain(p, 32);
        const FitResult a = fit_smml(2, domain, n, p, 4, 42);
        const FitResult b = fit_smml(2, domain, n, p, 4, 42);
        REQUIRE(a.code.I1 == b.code.I1);
        for (int i = 0; i < 2; ++i)
            REQUIRE(a.code.assertions[i].v == b.code.assertions[i].v);
    }
}

TEST_CASE("cell_polytope") {
    const int n = 4, p = 1;
    const TruncatedDomain domain = default_domain(p, 32);

    SECTION("single cell has no inequalities") {
        SmmlCode code{1, {NaturalParam(vec2(0.0, -1.0))}, {1.0}, domain, 0.0};
        REQUIRE(cell_polytope(code, 0, n).inequalities.empty());
    }

    SECTION("mirror pair: the boundary is the vertical axis") {
        const SmmlCode code = mirror_pair_code(1.1, 0.5, domain);
        const CellPolytope poly = cell_polytope(code, 0, n);
        REQUIRE(poly.inequalities.size() == 1);
        const auto& [a, b] = poly.inequalities[0];
        REQUIRE(a[0] == Catch::Approx(-2.2).epsilon(1e-13));
        REQUIRE(a[1] == Catch::Approx(0.0).margin(1e-13));
        REQUIRE(b == Catch::Approx(0.0).margin(1e-13));
    }

    SECTION("assignment matches polytope membership on the grid") {
        const SmmlCode code = fit_smml(3, domain, n, p, 6, 2).code;
        std::vector<CellPolytope> polys;
        for (int i = 0; i < code.m; ++i) polys.push_back(cell_polytope(code, i, n));
        for (const auto& x : grid_points(domain, n, p)) {
            const int cell = assign_cell(x, code, n);
            // the assigned cell's inequalities all hold
            for (const auto& [a, b] : polys[cell].inequalities)
                REQUIRE(a.dot(x.x) + b <= 1e-9);
            // membership with ties resolved to the lowest index is unique
            for (int i = 0; i < cell; ++i) {
                bool inside = true;
                for (const auto& [a, b] : polys[i].inequalities)
                    if (a.dot(x.x) + b > 1e-12) { inside = false; break; }
                REQUIRE_FALSE(inside);
            }
        }
    }
}

TEST_CASE("cells are convex on the grid") {
    const int n = 4, p = 1;
    const TruncatedDomain domain = default_domain(p, 64);
    const SmmlCode code = fit_smml(3, domain, n, p, 6, 8).code;
    const auto pts = grid_points(domain, n, p);
    Rng rng(121);
    for (int trial = 0; trial < 500; ++trial) {
        const auto& a = pts[static_cast<std::size_t>(rng.uniform() * pts.size())];
        const auto& b = pts[static_cast<std::size_t>(rng.uniform() * pts.size())];
        const int ca = assign_cell(a, code, n);
        if (ca != assign_cell(b, code, n)) continue;
        const SuffStat mid(0.5 * (a.x + b.x));
        REQUIRE(assign_cell(mid, code, n) == ca);
    }
}

TEST_CASE("tessellation_hyperbolic") {
    const int n = 4, p = 1;
    const TruncatedDomain domain = default_domain(p, 64);

    SECTION("mirror pair exports the vertical plane u1 = 0") {
        const SmmlCode code = mirror_pair_code(1.0, 0.5, domain);
        const auto cells = tessellation_hyperbolic(code, n);
        REQUIRE(cells.size() == 2);
        REQUIRE(cells[0].planes.size() == 1);
        REQUIRE(std::holds_alternative<VerticalPlane>(cells[0].planes[0]));
        const auto& vp = std::get<VerticalPlane>(cells[0].planes[0]);
        REQUIRE(std::abs(vp.d / vp.c.norm()) < 1e-12);
        REQUIRE(std::abs(vp.c[1]) < 1e-13);
    }

    SECTION("facets with a height component export hemispheres") {
        SmmlCode code{2,
                      {NaturalParam(vec2(0.0, -1.0)), NaturalParam(vec2(0.0, -0.5))},
                      {0.5, 0.5},
                      domain,
                      0.0};
        const Facet f = code_facets(code, n)[0];
        REQUIRE(f.a[1] != 0.0);
        REQUIRE(f.plane.has_value());
        REQUIRE(std::holds_alternative<SpherePlane>(*f.plane));
        const auto& sp = std::get<SpherePlane>(*f.plane);
        const double c1 = -f.a[0] / (2.0 * f.a[1]);
        REQUIRE(sp.radius == Catch::Approx(std::sqrt(-f.b / f.a[1] + c1 * c1)).epsilon(1e-12));
    }

    SECTION("sampled facet points map onto their plane") {
        const SmmlCode code = fit_smml(3, domain, n, p, 6, 31).code;
        for (const Facet& f : code_facets(code, n)) {
            if (!f.plane) continue;
            // parameterize the facet line and keep interior points
            int tested = 0;
            for (int k = -20; k <= 20 && tested < 8; ++k) {
                const double s = 0.1 * k;
                VectorXd x(2);
                if (std::abs(f.a[1]) > 1e-12) {
                    x << s, -(f.b + f.a[0] * s) / f.a[1];
                } else {
                    x << -f.b / f.a[0], 1.0 + 0.3 * k;
                }
                if (residual_gap(x) <= 1e-6) continue;
                const ExpectationParam img =
                    horomap_xi(ExpectationParam(x), HoromapDirection::Forward);
                const UpperHalfParam u = xi_to_u(img, n);
                REQUIRE(std::abs(plane_residual(*f.plane, u)) < 1e-8 * (1.0 + x.norm()));
                ++tested;
            }
            REQUIRE(tested > 0);
        }
    }

    SECTION("exported planes separate the cells consistently") {
        const SmmlCode code = fit_smml(2, domain, n, p, 6, 13).code;
        const auto facets = code_facets(code, n);
        REQUIRE(facets.size() == 1);
        if (!facets[0].plane) return;
        const auto& plane = *facets[0].plane;
        DomainGrid grid(domain, n, p, domain.resolution);
        double side[2] = {0.0, 0.0};
        bool mixed = false;
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const SuffStat x(grid.x[c]);
            const int cell = assign_cell(x, code, n);
            const UpperHalfParam u =
                xi_to_u(horomap_xi(ExpectationParam(grid.x[c]), HoromapDirection::Forward), n);
            const double res = plane_residual(plane, u);
            if (std::abs(res) < 1e-9) continue;
            if (side[cell] == 0.0)
                side[cell] = res > 0 ? 1.0 : -1.0;
            else if (side[cell] * res < 0.0)
                mixed = true;
        }
        REQUIRE_FALSE(mixed);
        REQUIRE(side[0] * side[1] < 0.0);
    }
}
