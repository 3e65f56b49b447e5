#pragma once

#include <Eigen/Core>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypersmml/model.hpp"
#include "hypersmml/smml.hpp"

namespace hypersmml {

/// Shortest fixed-precision decimal image used for every number we persist:
/// 17 significant digits round-trip any double exactly.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) throw std::domain_error("format_double: non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string json_vector(const VectorXd& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out + "]";
}

inline std::string json_matrix_rows(const MatrixXd& m) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += ", ";
        out += json_vector(m.row(i).transpose());
    }
    return out + "]";
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace detail

/// Everything cmd_fit persists about a fitted code.
struct CodeDocument {
    SmmlCode code;
    int n = 0;
    int p = 0;
    int iterations = 0;
    std::uint64_t seed = 0;
};

/// Serialize a fitted code with a fixed field order and 17-digit numbers, so
/// identical fits produce byte-identical files.
inline std::string code_document_text(const CodeDocument& doc) {
    const SmmlCode& code = doc.code;
    validate_code(code);
    std::string s;
    s += "{\n";
    s += "  \"m\": " + std::to_string(code.m) + ",\n";
    s += "  \"n\": " + std::to_string(doc.n) + ",\n";
    s += "  \"p\": " + std::to_string(doc.p) + ",\n";
    s += "  \"domain\": {\"lower\": " + detail::json_vector(code.domain.lower)
         + ", \"upper\": " + detail::json_vector(code.domain.upper)
         + ", \"resolution\": " + std::to_string(code.domain.resolution) + "},\n";
    s += "  \"assertions\": [";
    for (int i = 0; i < code.m; ++i) {
        if (i) s += ", ";
        s += detail::json_vector(code.assertions[i].v);
    }
    s += "],\n";
    s += "  \"coding_probs\": [";
    for (int i = 0; i < code.m; ++i) {
        if (i) s += ", ";
        s += format_double(code.coding_probs[i]);
    }
    s += "],\n";
    s += "  \"I1_nats\": " + format_double(code.I1) + ",\n";
    s += "  \"I1_bits\": " + format_double(code.I1 / std::numbers::ln2) + ",\n";
    s += "  \"iterations\": " + std::to_string(doc.iterations) + ",\n";
    s += "  \"seed\": " + std::to_string(doc.seed) + ",\n";

    const std::vector<Facet> facets = code_facets(code, doc.n);
    std::string facet_rows, dropped_rows;
    for (const Facet& f : facets) {
        const std::string cells =
            "[" + std::to_string(f.cell_i) + ", " + std::to_string(f.cell_j) + "]";
        if (!f.plane) {
            if (!dropped_rows.empty()) dropped_rows += ",\n";
            dropped_rows += "    {\"cells\": " + cells + ", \"reason\": \"no-intersection\"}";
            continue;
        }
        if (!facet_rows.empty()) facet_rows += ",\n";
        facet_rows += "    {\"cells\": " + cells + ", \"a\": " + detail::json_vector(f.a)
                      + ", \"b\": " + format_double(f.b) + ", \"hyperbolic\": ";
        if (std::holds_alternative<SpherePlane>(*f.plane)) {
            const auto& sp = std::get<SpherePlane>(*f.plane);
            facet_rows += "{\"variant\": \"sphere\", \"c\": " + detail::json_vector(sp.c)
                          + ", \"R\": " + format_double(sp.radius) + "}";
        } else {
            const auto& vp = std::get<VerticalPlane>(*f.plane);
            facet_rows += "{\"variant\": \"vertical\", \"c\": " + detail::json_vector(vp.c)
                          + ", \"d\": " + format_double(vp.d) + "}";
        }
        facet_rows += "}";
    }
    s += "  \"facets\": [";
    if (!facet_rows.empty()) s += "\n" + facet_rows + "\n  ";
    s += "],\n";
    s += "  \"dropped_facets\": [";
    if (!dropped_rows.empty()) s += "\n" + dropped_rows + "\n  ";
    s += "]\n";
    s += "}\n";
    return s;
}

inline void write_code_document(const std::string& path, const CodeDocument& doc) {
    detail::write_text_file(path, code_document_text(doc));
}

inline CodeDocument read_code_document(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("invalid code file " + path + ": " + e.what());
    }
    CodeDocument doc;
    doc.n = j.at("n").get<int>();
    doc.p = j.at("p").get<int>();
    doc.iterations = j.at("iterations").get<int>();
    doc.seed = j.at("seed").get<std::uint64_t>();

    const auto& jd = j.at("domain");
    const auto to_vector = [](const nlohmann::json& arr) {
        VectorXd v(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
        return v;
    };
    TruncatedDomain domain(to_vector(jd.at("lower")), to_vector(jd.at("upper")),
                           jd.at("resolution").get<int>());

    SmmlCode code{j.at("m").get<int>(), {}, {}, domain, j.at("I1_nats").get<double>()};
    for (const auto& row : j.at("assertions")) code.assertions.emplace_back(to_vector(row));
    for (const auto& q : j.at("coding_probs")) code.coding_probs.push_back(q.get<double>());
    validate_code(code);
    doc.code = std::move(code);
    return doc;
}

/// Output of cmd_suffstat: the basis actually used and the statistic.
inline std::string suffstat_document_text(const DesignBasis& basis, const SuffStat& x) {
    std::string s;
    s += "{\n";
    s += "  \"n\": " + std::to_string(basis.n) + ",\n";
    s += "  \"p\": " + std::to_string(basis.p) + ",\n";
    s += "  \"B\": " + detail::json_matrix_rows(basis.B) + ",\n";
    s += "  \"x\": " + detail::json_vector(x.x) + "\n";
    s += "}\n";
    return s;
}

// --- CSV ---------------------------------------------------------------------

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_cell(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

}  // namespace detail

/// Numeric CSV reader. A first line containing any non-numeric cell is
/// treated as a header and skipped; after that every row must be numeric and
/// rectangular.
inline MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open CSV file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        std::size_t bad_col = 0;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            if (!detail::parse_cell(cell, v)) {
                numeric = false;
                bad_col = col;
            }
            row.push_back(v);
            ++col;
        }
        if (!numeric) {
            if (first_content_line) {
                first_content_line = false;  // header row
                continue;
            }
            throw CsvError("non-numeric cell at line " + std::to_string(line_no) + ", column "
                           + std::to_string(bad_col + 1) + " of " + path);
        }
        first_content_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw CsvError("ragged CSV: line " + std::to_string(line_no) + " has "
                           + std::to_string(row.size()) + " cells, expected "
                           + std::to_string(rows.front().size()) + " in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CsvError("CSV file has no data rows: " + path);
    MatrixXd out(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
    return out;
}

}  // namespace hypersmml
