#pragma once

#include <cstdint>
#include <iostream>
#include <string>

#include "hypersmml/io.hpp"
#include "hypersmml/smml.hpp"
#include "hypersmml/svg.hpp"
#include "hypersmml/verify.hpp"

namespace hypersmml {

struct FitArgs {
    int m = 1;
    int n = 4;
    int p = 1;
    TruncatedDomain domain;   // resolution field is the grid resolution
    int restarts = 8;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    int max_iter = 500;
    std::string out;
};

/// Fit a code and persist it. Returns the written document.
inline CodeDocument cmd_fit(const FitArgs& args) {
    const FitResult fit = fit_smml(args.m, args.domain, args.n, args.p, args.restarts, args.seed,
                                   args.tol, args.max_iter);
    CodeDocument doc{fit.code, args.n, args.p, fit.iterations, args.seed};
    write_code_document(args.out, doc);
    return doc;
}

/// Run the invariant suite; write the report to `out` (or stdout when empty).
/// Returns 0 when every executed check passes.
inline int cmd_verify(const std::string& config_path, const std::string& out,
                      std::ostream& console = std::cout) {
    VerifyConfig cfg;
    if (!config_path.empty()) cfg = read_verify_config(config_path);
    const std::vector<CheckRecord> records = run_verify(cfg);
    const std::string report = verify_report_text(cfg, records);
    if (out.empty())
        console << report;
    else
        detail::write_text_file(out, report);
    for (const CheckRecord& r : records)
        if (!r.skipped && !r.pass) return 1;
    return 0;
}

/// Render a persisted code file to SVG.
inline void cmd_plot(const std::string& code_path, const std::string& out, PlotView view) {
    const CodeDocument doc = read_code_document(code_path);
    if (doc.p != 1)
        throw std::invalid_argument("plot: only p = 1 codes can be drawn, file has p = "
                                    + std::to_string(doc.p));
    detail::write_text_file(out, render_code_svg(doc.code, doc.n, view));
}

/// Compute the sufficient statistic of a design/response CSV pair.
inline void cmd_suffstat(const std::string& design_path, const std::string& response_path,
                         const std::string& out) {
    const MatrixXd design = read_csv_matrix(design_path);
    const MatrixXd response = read_csv_matrix(response_path);
    if (response.cols() != 1)
        throw CsvError("response CSV must have exactly one column, got "
                       + std::to_string(response.cols()));
    if (response.rows() != design.rows())
        throw CsvError("design has " + std::to_string(design.rows()) + " rows but response has "
                       + std::to_string(response.rows()));
    const DesignBasis basis = make_design_basis(design);
    const SuffStat x = suff_stat(basis, response.col(0));
    detail::write_text_file(out, suffstat_document_text(basis, x));
}

}  // namespace hypersmml
