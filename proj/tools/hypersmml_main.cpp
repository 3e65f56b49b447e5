// Command-line surface: fit codes, verify the numerical invariants, compute
// sufficient statistics from CSV data and draw fitted partitions.
//
// Exit codes: 0 success, 1 failed checks or runtime error, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hypersmml/commands.hpp"

namespace {

using hypersmml::TruncatedDomain;

/// Parse "lo1,lo2,.../hi1,hi2,..." into box bounds.
TruncatedDomain parse_domain(const std::string& text, int p, int resolution) {
    const auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, sep)) parts.push_back(item);
        return parts;
    };
    const auto halves = split(text, '/');
    if (halves.size() != 2)
        throw CLI::ValidationError("--domain", "expected lo1,lo2,.../hi1,hi2,...");
    Eigen::VectorXd lo(p + 1), hi(p + 1);
    for (int side = 0; side < 2; ++side) {
        const auto cells = split(halves[side], ',');
        if (static_cast<int>(cells.size()) != p + 1)
            throw CLI::ValidationError("--domain", "expected " + std::to_string(p + 1)
                                                       + " coordinates per bound");
        for (int i = 0; i <= p; ++i) {
            try {
                (side == 0 ? lo : hi)[i] = std::stod(cells[i]);
            } catch (const std::exception&) {
                throw CLI::ValidationError("--domain", "non-numeric coordinate: " + cells[i]);
            }
        }
    }
    return TruncatedDomain(lo, hi, resolution);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information geometry and two-part codes for Gaussian linear regression"};
    app.require_subcommand(1);

    // fit ----------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "fit a code on a truncated domain and write JSON");
    int m = 1, n = 4, p = 1, resolution = 64, restarts = 8, max_iter = 500;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    std::string domain_text, fit_out = "code.json";
    fit->add_option("--m", m, "number of cells")->check(CLI::PositiveNumber);
    fit->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    fit->add_option("--p", p, "covariate count")->check(CLI::PositiveNumber);
    fit->add_option("--domain", domain_text, "box bounds lo1,lo2,.../hi1,hi2,...");
    fit->add_option("--resolution", resolution, "grid cells per axis")->check(CLI::Range(2, 4096));
    fit->add_option("--restarts", restarts, "number of search restarts")
        ->check(CLI::PositiveNumber);
    fit->add_option("--seed", seed, "random seed");
    fit->add_option("--tol", tol, "relative convergence tolerance");
    fit->add_option("--max-iter", max_iter, "iteration cap per restart")
        ->check(CLI::PositiveNumber);
    fit->add_option("--out", fit_out, "output JSON path");

    // verify -------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run the numerical invariant suite");
    std::string config_path, verify_out;
    verify->add_option("config", config_path, "JSON config with n, p, seed, tolerances");
    verify->add_option("--out", verify_out, "report path (stdout when omitted)");

    // plot ---------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "draw a fitted p = 1 code as SVG");
    std::string code_path, plot_out = "code.svg", view_name = "affine";
    plot->add_option("--code", code_path, "fitted code JSON")->required();
    plot->add_option("--out", plot_out, "output SVG path");
    plot->add_option("--view", view_name, "affine or hyperbolic")
        ->check(CLI::IsMember({"affine", "hyperbolic"}));

    // suffstat -----------------------------------------------------------
    auto* suff = app.add_subcommand("suffstat", "sufficient statistic of a CSV dataset");
    std::string design_path, response_path, suff_out = "suffstat.json";
    suff->add_option("--design", design_path, "design matrix CSV (n rows, p columns)")
        ->required();
    suff->add_option("--response", response_path, "response CSV (n rows, 1 column)")->required();
    suff->add_option("--out", suff_out, "output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            hypersmml::FitArgs args;
            args.m = m;
            args.n = n;
            args.p = p;
            args.domain = domain_text.empty() ? hypersmml::default_domain(p, resolution)
                                              : parse_domain(domain_text, p, resolution);
            args.restarts = restarts;
            args.seed = seed;
            args.tol = tol;
            args.max_iter = max_iter;
            args.out = fit_out;
            const auto doc = hypersmml::cmd_fit(args);
            std::cout << "wrote " << fit_out << " (I1 = " << doc.code.I1 << " nats, "
                      << doc.iterations << " iterations)\n";
            return 0;
        }
        if (verify->parsed()) {
            if (!config_path.empty()) {
                std::ifstream probe(config_path);
                if (!probe) {
                    std::cerr << "verify: cannot read config " << config_path << "\n";
                    return 2;
                }
            }
            return hypersmml::cmd_verify(config_path, verify_out);
        }
        if (plot->parsed()) {
            hypersmml::cmd_plot(code_path, plot_out,
                                view_name == "affine" ? hypersmml::PlotView::Affine
                                                      : hypersmml::PlotView::Hyperbolic);
            std::cout << "wrote " << plot_out << "\n";
            return 0;
        }
        if (suff->parsed()) {
            hypersmml::cmd_suffstat(design_path, response_path, suff_out);
            std::cout << "wrote " << suff_out << "\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
